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

#include "pprl/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace pprl {

namespace {

void put_string(Bytes& out, const std::string& s) {
  put_u32_be(out, static_cast<uint32_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

}  // namespace

Digest256 LinkageConfig::params_digest() const {
  static constexpr std::string_view kLabel = "pprl/params/v1";
  Bytes buf(kLabel.begin(), kLabel.end());
  put_u32_be(buf, lsh.bands);
  put_u32_be(buf, lsh.rows);
  buf.insert(buf.end(), lsh.seed.begin(), lsh.seed.end());
  return sha256(buf);
}

Digest256 LinkageConfig::spec_digest() const {
  static constexpr std::string_view kLabel = "pprl/groups/v1";
  Bytes buf(kLabel.begin(), kLabel.end());
  put_u32_be(buf, static_cast<uint32_t>(groups.size()));
  for (const auto& g : groups) {
    put_string(buf, g.name);
    put_u32_be(buf, static_cast<uint32_t>(g.members.size()));
    for (const auto& m : g.members) put_string(buf, m);
    put_u32_be(buf, g.k);
    put_u32_be(buf, g.w);
  }
  return sha256(buf);
}

LinkageConfig parse_config(const std::string& json_text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("config: ") + e.what());
  }
  LinkageConfig cfg;
  try {
    cfg.id_field = j.value("id_field", std::string("id"));
    cfg.threshold = j.value("threshold", 0.5);
    const json& lsh = j.at("lsh");
    cfg.lsh.bands = lsh.at("bands").get<uint32_t>();
    cfg.lsh.rows = lsh.at("rows").get<uint32_t>();
    Bytes seed = from_hex(lsh.at("seed").get<std::string>());
    if (seed.size() != cfg.lsh.seed.size()) {
      throw std::runtime_error("config: lsh.seed must be 32 bytes (64 hex digits)");
    }
    std::copy(seed.begin(), seed.end(), cfg.lsh.seed.begin());
    for (const json& g : j.at("groups")) {
      FieldGroupSpec spec;
      spec.name = g.at("name").get<std::string>();
      spec.members = g.at("fields").get<std::vector<std::string>>();
      spec.k = g.at("k").get<uint32_t>();
      spec.w = g.value("w", 1u);
      cfg.groups.push_back(std::move(spec));
    }
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("config: ") + e.what());
  }
  if (cfg.threshold <= 0.0 || cfg.threshold >= 1.0) {
    throw std::runtime_error("config: threshold must lie in (0, 1)");
  }
  validate(cfg.lsh);
  validate_specs(cfg.groups);
  return cfg;
}

LinkageConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const LinkageConfig& cfg) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["id_field"] = cfg.id_field;
  j["threshold"] = cfg.threshold;
  j["lsh"] = {{"bands", cfg.lsh.bands}, {"rows", cfg.lsh.rows}, {"seed", to_hex(cfg.lsh.seed)}};
  ordered_json groups = ordered_json::array();
  for (const auto& g : cfg.groups) {
    groups.push_back({{"name", g.name}, {"fields", g.members}, {"k", g.k}, {"w", g.w}});
  }
  j["groups"] = groups;
  return j.dump(2) + "\n";
}

}  // namespace pprl
