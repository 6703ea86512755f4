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
#include <iosfwd>
#include <vector>

#include "pprl/config.hpp"
#include "pprl/protocol.hpp"

namespace pprl {

/// One row of the performance table for a loopback session between two
/// synthetic datasets of `set_size` records each.
struct BenchRow {
  size_t set_size = 0;
  double comm_kb = 0;  // bytes sent by both parties / 1024
  double comm_seconds = 0;
  double offline_seconds = 0;
  double total_seconds = 0;
  size_t matched = 0;
};

/// Generates a dataset pair (10% planted, typo rate 0.1) and runs the base
/// protocol over loopback. Times are the sender's.
BenchRow bench_once(size_t set_size, const LinkageConfig& linkage, uint64_t seed);

std::vector<BenchRow> bench_sizes(const std::vector<size_t>& sizes, const LinkageConfig& linkage,
                                  uint64_t seed);

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

}  // namespace pprl
