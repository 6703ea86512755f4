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

#include "pprl/lsh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pprl {

void validate(const LshParams& params) {
  if (params.bands == 0) throw std::invalid_argument("LSH bands must be >= 1");
  if (params.rows == 0) throw std::invalid_argument("LSH rows must be >= 1");
}

namespace {

class CoeffStream {
 public:
  explicit CoeffStream(const Digest256& seed) : seed_(seed) {}

  uint64_t next() {
    if (pos_ == 4) refill();
    return get_u64_be(block_.data() + 8 * pos_++) & kMersennePrime;
  }

 private:
  void refill() {
    static constexpr std::string_view kLabel = "pprl/lsh-coeffs";
    Bytes msg(kLabel.begin(), kLabel.end());
    put_u64_be(msg, counter_++);
    block_ = hmac_sha256(seed_, msg);
    pos_ = 0;
  }

  Digest256 seed_;
  Digest256 block_{};
  uint64_t counter_ = 0;
  size_t pos_ = 4;
};

uint64_t mod_mersenne(unsigned __int128 x) {
  x = (x & kMersennePrime) + (x >> 61);
  x = (x & kMersennePrime) + (x >> 61);
  auto r = static_cast<uint64_t>(x);
  return r >= kMersennePrime ? r - kMersennePrime : r;
}

}  // namespace

HashCoeffs HashCoeffs::derive(const LshParams& params) {
  validate(params);
  const size_t n = params.total_hashes();
  HashCoeffs out;
  out.c.resize(n);
  out.d.resize(n);
  CoeffStream stream(params.seed);
  for (size_t i = 0; i < n; ++i) {
    uint64_t c = 0;
    while (c == 0) c = stream.next();
    out.c[i] = c;
    out.d[i] = stream.next();
  }
  return out;
}

std::vector<std::string> shingles(std::string_view s, uint32_t k) {
  if (k == 0) throw std::invalid_argument("shingle length must be >= 1");
  auto units = utf8_units(s);
  std::vector<std::string> out;
  if (units.size() < k) return out;
  out.reserve(units.size() - k + 1);
  for (size_t i = 0; i + k <= units.size(); ++i) {
    const char* begin = units[i].data();
    const char* end = units[i + k - 1].data() + units[i + k - 1].size();
    out.emplace_back(begin, end);
  }
  return out;
}

std::unordered_set<std::string> shingle_set(std::string_view s, uint32_t k) {
  auto list = shingles(s, k);
  return {std::make_move_iterator(list.begin()), std::make_move_iterator(list.end())};
}

JaccardRatio jaccard(const std::unordered_set<std::string>& a,
                     const std::unordered_set<std::string>& b) {
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  size_t inter = 0;
  for (const auto& x : small) inter += large.count(x);
  return {inter, a.size() + b.size() - inter};
}

JaccardRatio jaccard(std::string_view a, std::string_view b, uint32_t k) {
  return jaccard(shingle_set(a, k), shingle_set(b, k));
}

std::vector<FieldGroup> field_groups(const Record& record,
                                     const std::vector<FieldGroupSpec>& specs) {
  std::vector<FieldGroup> out;
  out.reserve(specs.size());
  for (const auto& g : specs) {
    FieldGroup fg{{}, g.k, g.w};
    for (const auto& name : g.members) {
      if (const std::string* v = record.field(name)) fg.text += *v;
    }
    out.push_back(std::move(fg));
  }
  return out;
}

std::unordered_set<std::string> record_shingle_set(const Record& record,
                                                   const std::vector<FieldGroupSpec>& specs) {
  std::unordered_set<std::string> out;
  auto groups = field_groups(record, specs);
  for (size_t g = 0; g < groups.size(); ++g) {
    std::string tag = std::to_string(g) + '\x1f';
    for (auto& sh : shingles(groups[g].text, groups[g].k)) out.insert(tag + sh);
  }
  return out;
}

JaccardRatio jaccard(const Record& a, const Record& b, const std::vector<FieldGroupSpec>& specs) {
  return jaccard(record_shingle_set(a, specs), record_shingle_set(b, specs));
}

std::vector<WeightedShingle> get_weighted_shingles(std::span<const FieldGroup> groups) {
  std::vector<WeightedShingle> out;
  for (const auto& g : groups) {
    for (auto& sh : shingles(g.text, g.k)) out.push_back({std::move(sh), g.w});
  }
  return out;
}

uint32_t shingle_digest(std::string_view sh) {
  Digest256 d = sha256(sh);
  return get_u32_be(d.data());
}

uint64_t calc_h(uint32_t h, uint64_t c, uint64_t d, uint32_t w) {
  unsigned __int128 x = static_cast<unsigned __int128>(h) * c + d;
  const uint64_t reduced = mod_mersenne(x) & (kMaxHashValue - 1);
  if (w <= 1) return reduced;
  const double u = static_cast<double>(reduced) / static_cast<double>(kMaxHashValue);
  const double tail = (w == 2) ? std::sqrt(1.0 - u) : std::pow(1.0 - u, 1.0 / static_cast<double>(w));
  return static_cast<uint64_t>(std::floor(static_cast<double>(kMaxHashValue) * (1.0 - tail)));
}

std::vector<uint64_t> minhash_rows(std::span<const WeightedShingle> list,
                                   const LshParams& params, const HashCoeffs& coeffs) {
  if (list.empty()) throw std::invalid_argument("cannot Min-Hash an empty shingle list");
  const size_t total = params.total_hashes();
  if (coeffs.c.size() != total || coeffs.d.size() != total) {
    throw std::invalid_argument("hash coefficients do not match LSH params");
  }
  std::vector<uint32_t> digests(list.size());
  std::vector<uint32_t> weights(list.size());
  bool all_unit = true;
  for (size_t i = 0; i < list.size(); ++i) {
    digests[i] = shingle_digest(list[i].sh);
    weights[i] = list[i].w;
    all_unit = all_unit && list[i].w == 1;
  }
  std::vector<uint64_t> rows(total);
  for (size_t idx = 0; idx < total; ++idx) {
    const uint64_t c = coeffs.c[idx];
    const uint64_t d = coeffs.d[idx];
    uint64_t best = std::numeric_limits<uint64_t>::max();
    if (all_unit) {
      for (uint32_t h : digests) best = std::min(best, calc_h(h, c, d, 1));
    } else {
      for (size_t i = 0; i < digests.size(); ++i) {
        best = std::min(best, calc_h(digests[i], c, d, weights[i]));
      }
    }
    rows[idx] = best;
  }
  return rows;
}

BandSignatureList lsh_shingles(std::span<const WeightedShingle> list, const LshParams& params,
                               const HashCoeffs& coeffs) {
  auto rows = minhash_rows(list, params, coeffs);
  BandSignatureList sigs(params.bands);
  Bytes band;
  band.reserve(4 + 8 * params.rows);
  for (uint32_t b = 0; b < params.bands; ++b) {
    band.clear();
    // The band index keeps equal minima in different bands from colliding.
    put_u32_be(band, b);
    for (uint32_t r = 0; r < params.rows; ++r) put_u64_be(band, rows[b * params.rows + r]);
    sigs[b] = sha256(band);
  }
  return sigs;
}

BandSignatureList lsh_record(const Record& record, const std::vector<FieldGroupSpec>& specs,
                             const LshParams& params, const HashCoeffs& coeffs) {
  auto groups = field_groups(record, specs);
  auto list = get_weighted_shingles(groups);
  if (list.empty()) throw EmptyRecordError(record.id);
  return lsh_shingles(list, params, coeffs);
}

LshMatch lsh_match(const BandSignatureList& a, const BandSignatureList& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("band signature lists differ in length");
  }
  LshMatch m;
  for (size_t i = 0; i < a.size(); ++i) m.hits += a[i] == b[i] ? 1 : 0;
  m.matched = m.hits >= 1;
  return m;
}

LshEngine::LshEngine(LshParams params, std::vector<FieldGroupSpec> specs)
    : params_(params), specs_(std::move(specs)), coeffs_(HashCoeffs::derive(params_)) {
  validate_specs(specs_);
}

BandSignatureList LshEngine::signatures(const Record& preprocessed) const {
  return lsh_record(preprocessed, specs_, params_, coeffs_);
}

}  // namespace pprl
