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

#pragma once

#include <string>
#include <vector>

#include "pprl/core_model.hpp"
#include "pprl/lsh.hpp"

namespace pprl {

/// Everything both parties must agree on before a session: field groups,
/// LSH parameters and the shared seed. Loaded from a JSON file:
///
///   {
///     "id_field": "id",
///     "threshold": 0.6,
///     "lsh": { "bands": 20, "rows": 5, "seed": "<64 hex chars>" },
///     "groups": [ { "name": "name", "fields": ["first_name", "last_name"],
///                   "k": 3, "w": 2 }, ... ]
///   }
struct LinkageConfig {
  std::vector<FieldGroupSpec> groups;
  LshParams lsh;
  double threshold = 0.5;  // reporting only
  std::string id_field = "id";

  Digest256 params_digest() const;
  Digest256 spec_digest() const;
};

LinkageConfig parse_config(const std::string& json_text);
LinkageConfig load_config(const std::string& path);
std::string to_json(const LinkageConfig& cfg);

}  // namespace pprl
