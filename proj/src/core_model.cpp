// Copyright 2026 The PPRL Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pprl/core_model.hpp"

#include <locale.h>
#include <wctype.h>

#include <set>
#include <stdexcept>
#include <unordered_set>

namespace pprl {

const std::string* Record::field(const std::string& name) const {
  auto it = fields.find(name);
  return it == fields.end() ? nullptr : &it->second;
}

void validate_specs(const std::vector<FieldGroupSpec>& specs) {
  std::set<std::string> seen_fields;
  std::set<std::string> seen_groups;
  for (const auto& g : specs) {
    if (g.k == 0) throw std::invalid_argument("group '" + g.name + "': k must be >= 1");
    if (g.w == 0) throw std::invalid_argument("group '" + g.name + "': w must be >= 1");
    if (g.members.empty()) {
      throw std::invalid_argument("group '" + g.name + "' has no fields");
    }
    if (!seen_groups.insert(g.name).second) {
      throw std::invalid_argument("duplicate group name '" + g.name + "'");
    }
    for (const auto& f : g.members) {
      if (!seen_fields.insert(f).second) {
        throw std::invalid_argument("field '" + f + "' appears in more than one group");
      }
    }
  }
}

namespace {

// Decodes one code point starting at text[i]; returns its byte length.
// Malformed sequences decode as a single byte with code point 0xFFFD.
size_t decode_utf8(std::string_view text, size_t i, char32_t& cp) {
  auto b0 = static_cast<uint8_t>(text[i]);
  size_t len = 0;
  if (b0 < 0x80) {
    cp = b0;
    return 1;
  } else if ((b0 & 0xe0) == 0xc0) {
    cp = b0 & 0x1f;
    len = 2;
  } else if ((b0 & 0xf0) == 0xe0) {
    cp = b0 & 0x0f;
    len = 3;
  } else if ((b0 & 0xf8) == 0xf0) {
    cp = b0 & 0x07;
    len = 4;
  } else {
    cp = 0xfffd;
    return 1;
  }
  if (i + len > text.size()) {
    cp = 0xfffd;
    return 1;
  }
  for (size_t j = 1; j < len; ++j) {
    auto b = static_cast<uint8_t>(text[i + j]);
    if ((b & 0xc0) != 0x80) {
      cp = 0xfffd;
      return 1;
    }
    cp = (cp << 6) | (b & 0x3f);
  }
  return len;
}

void encode_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else {
    out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  }
}

locale_t utf8_locale() {
  static locale_t loc = [] {
    locale_t l = newlocale(LC_CTYPE_MASK, "C.UTF-8", nullptr);
    if (l == nullptr) l = newlocale(LC_CTYPE_MASK, "C.utf8", nullptr);
    return l;
  }();
  return loc;
}

bool is_space(char32_t cp) {
  if (cp == ' ' || (cp >= 0x09 && cp <= 0x0d)) return true;
  if (cp < 0x80) return false;
  switch (cp) {
    case 0x85: case 0xa0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202f: case 0x205f: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200a;
  }
}

bool is_alnum(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') ||
           (cp >= 'A' && cp <= 'Z');
  }
  if (cp == 0xfffd) return false;
  locale_t loc = utf8_locale();
  return loc != nullptr && iswalnum_l(static_cast<wint_t>(cp), loc);
}

char32_t to_lower(char32_t cp) {
  if (cp < 0x80) return (cp >= 'A' && cp <= 'Z') ? cp + 32 : cp;
  locale_t loc = utf8_locale();
  return loc == nullptr ? cp : static_cast<char32_t>(towlower_l(static_cast<wint_t>(cp), loc));
}

}  // namespace

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (size_t i = 0; i < text.size();) {
    char32_t cp = 0;
    i += decode_utf8(text, i, cp);
    if (is_space(cp)) {
      pending_space = true;
    } else if (is_alnum(cp)) {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      encode_utf8(to_lower(cp), out);
    }
  }
  return out;
}

std::vector<std::string_view> utf8_units(std::string_view text) {
  std::vector<std::string_view> units;
  units.reserve(text.size());
  for (size_t i = 0; i < text.size();) {
    char32_t cp = 0;
    size_t len = decode_utf8(text, i, cp);
    units.push_back(text.substr(i, len));
    i += len;
  }
  return units;
}

Record preprocess(const Record& record, const std::vector<FieldGroupSpec>& specs) {
  Record out;
  out.id = record.id;
  for (const auto& g : specs) {
    for (const auto& name : g.members) {
      const std::string* value = record.field(name);
      out.fields[name] = value ? normalize_text(*value) : std::string{};
    }
  }
  return out;
}

Dataset preprocess(const Dataset& ds, const std::vector<FieldGroupSpec>& specs) {
  Dataset out;
  out.records.reserve(ds.size());
  for (const auto& r : ds.records) out.records.push_back(preprocess(r, specs));
  return out;
}

std::string dedup_key(const Record& record, const std::vector<FieldGroupSpec>& specs) {
  std::string key;
  for (const auto& g : specs) {
    for (const auto& name : g.members) {
      const std::string* value = record.field(name);
      if (value) key += normalize_text(*value);
      key.push_back('\x1f');
    }
  }
  return key;
}

Dataset deduplicate(const Dataset& ds, const std::vector<FieldGroupSpec>& specs) {
  Dataset out;
  std::unordered_set<std::string> seen;
  for (const auto& r : ds.records) {
    if (seen.insert(dedup_key(r, specs)).second) out.records.push_back(r);
  }
  return out;
}

double ExactJaccard::value() const {
  size_t uni = local_size + peer_size - intersection;
  return uni == 0 ? 1.0 : static_cast<double>(intersection) / static_cast<double>(uni);
}

size_t MatchResult::matched_records() const {
  std::set<size_t> ids;
  for (const auto& p : pairs) ids.insert(p.local_index);
  return ids.size();
}

uint32_t MatchResult::record_hits(size_t local_index) const {
  uint32_t total = 0;
  for (const auto& p : pairs) {
    if (p.local_index == local_index) total += p.hits;
  }
  return total;
}

}  // namespace pprl
