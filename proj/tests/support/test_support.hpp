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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pprl/core_model.hpp"
#include "pprl/lsh.hpp"

namespace pprl::testing {

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// Asymptotic two-sample critical value at alpha = 0.01:
/// c(alpha) * sqrt((n + m) / (n m)), c = sqrt(-ln(alpha / 2) / 2).
inline double ks_critical_1pct(size_t n, size_t m) {
  const double c = std::sqrt(-0.5 * std::log(0.005));
  const double dn = static_cast<double>(n), dm = static_cast<double>(m);
  return c * std::sqrt((dn + dm) / (dn * dm));
}

/// UTF-8 string of `count` distinct CJK code points starting at U+4E00+first.
inline std::string distinct_chars(size_t first, size_t count) {
  std::string s;
  for (size_t i = 0; i < count; ++i) {
    const uint32_t cp = 0x4e00 + static_cast<uint32_t>(first + i);
    s.push_back(static_cast<char>(0xe0 | (cp >> 12)));
    s.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    s.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  }
  return s;
}

/// Two strings of `size` distinct characters each sharing `common` of them.
/// With k = 1 their shingle sets have Jaccard common / (2 size - common).
inline std::pair<std::string, std::string> engineered_pair(size_t size, size_t common) {
  return {distinct_chars(0, size), distinct_chars(size - common, size)};
}

inline Record single_field_record(std::string id, std::string text) {
  Record r;
  r.id = std::move(id);
  r.fields["text"] = std::move(text);
  return r;
}

inline std::vector<FieldGroupSpec> single_field_spec(uint32_t k, uint32_t w = 1) {
  return {{"text", {"text"}, k, w}};
}

inline LshParams params_with_seed(uint32_t bands, uint32_t rows, uint64_t seed) {
  LshParams p;
  p.bands = bands;
  p.rows = rows;
  for (int i = 0; i < 8; ++i) p.seed[i] = static_cast<uint8_t>(seed >> (56 - 8 * i));
  return p;
}

/// Match probability computed directly in long double.
inline long double s_curve(long double j, unsigned bands, unsigned rows) {
  return 1.0L - std::pow(1.0L - std::pow(j, static_cast<long double>(rows)),
                         static_cast<long double>(bands));
}

}  // namespace pprl::testing
