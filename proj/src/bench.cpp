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

#include "pprl/bench.hpp"

#include <ostream>

#include "pprl/synth.hpp"

namespace pprl {

BenchRow bench_once(size_t set_size, const LinkageConfig& linkage, uint64_t seed) {
  SynthOptions opts;
  opts.n = set_size;
  opts.planted = set_size / 10;
  opts.typo_rate = 0.1;
  opts.seed = seed;
  const SynthData data = generate_synthetic(opts);

  ProtocolConfig cfg;
  cfg.linkage = linkage;
  const LoopbackOutcome out = run_loopback(data.a, data.b, cfg);

  BenchRow row;
  row.set_size = set_size;
  row.comm_kb =
      static_cast<double>(out.sender.stats.bytes_sent + out.receiver.stats.bytes_sent) / 1024.0;
  row.comm_seconds = out.sender.stats.comm_seconds;
  row.offline_seconds = out.sender.stats.offline_seconds;
  row.total_seconds = out.sender.stats.total_seconds;
  row.matched = out.sender.matched_records();
  return row;
}

std::vector<BenchRow> bench_sizes(const std::vector<size_t>& sizes, const LinkageConfig& linkage,
                                  uint64_t seed) {
  std::vector<BenchRow> rows;
  for (size_t n : sizes) rows.push_back(bench_once(n, linkage, seed));
  return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "set_size,comm_kb,comm_time_s,offline_time_s,total_time_s,matched\n";
  for (const auto& r : rows) {
    out << r.set_size << ',' << r.comm_kb << ',' << r.comm_seconds << ',' << r.offline_seconds
        << ',' << r.total_seconds << ',' << r.matched << '\n';
  }
}

}  // namespace pprl
