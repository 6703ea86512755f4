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

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pprl/config.hpp"
#include "pprl/core_model.hpp"

namespace pprl {

/// Column order of generated datasets: first_name, last_name, email,
/// email_domain, address_number, address_location, address_line, city,
/// state, country, zip_base, zip_ext, phone_area_code, phone_exchange_code,
/// phone_line_number.
const std::vector<std::string>& synth_fields();

struct SynthOptions {
  size_t n = 1000;         // records per dataset
  size_t planted = 100;    // entities present in both datasets
  double typo_rate = 0.1;  // per-field probability of one perturbation
  uint64_t seed = 1;
};

/// Pairs (id in dataset A, id in dataset B) that describe the same entity.
using GroundTruth = std::vector<std::pair<std::string, std::string>>;

struct SynthData {
  Dataset a;
  Dataset b;
  GroundTruth truth;
};

/// Throws std::invalid_argument unless planted <= n and typo_rate is in
/// [0, 1].
SynthData generate_synthetic(const SynthOptions& opts);

/// One random edit: swap of adjacent characters, drop, duplicate, or a
/// case/style change. Strings shorter than two characters only get the
/// edits that apply to them.
std::string apply_typo(const std::string& s, std::mt19937_64& rng);

/// Applies apply_typo to every field independently with probability
/// `rate`. The id is kept.
Record perturb(const Record& r, double rate, std::mt19937_64& rng);

/// Field groups for the generated schema (name, email, address, phone)
/// with B = 45, R = 10 and an LSH seed derived from `seed`.
LinkageConfig synthetic_config(uint64_t seed);

/// A fresh random record over synth_fields().
Record random_person(std::mt19937_64& rng);

}  // namespace pprl
