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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pprl/core_model.hpp"
#include "pprl/lsh.hpp"
#include "pprl/synth.hpp"

namespace pprl {

/// Probability that two records with Jaccard index J share at least one of
/// B bands of R rows: 1 - (1 - J^R)^B.
double match_probability(double j, uint32_t bands, uint32_t rows);

/// Jaccard index at which the S-curve rises steepest, (1/B)^(1/R).
double curve_threshold(uint32_t bands, uint32_t rows);

/// Two-sided standard-normal quantile for a confidence level in (0, 1),
/// e.g. 0.95 -> 1.95996.
double z_for_confidence(double confidence);

struct JaccardInterval {
  double lo = 0;
  double hi = 0;
  bool contains(double j) const { return lo <= j && j <= hi; }
};

/// Interval for the Jaccard index of a pair with h of B bands in common:
///   [ |h/B - z*sqrt(t*h/B^3)|^(1/R), |h/B + z*sqrt(t*h/B^3)|^(1/R) ],
/// t = B - h, clamped to [0, 1]. Throws std::invalid_argument if h > B.
JaccardInterval estimate_jaccard_interval(uint32_t hits, uint32_t bands, uint32_t rows,
                                          double confidence = 0.95);

struct CurveSpec {
  uint32_t bands = 20;
  uint32_t rows = 5;
  double threshold = 0.5;  // target Jaccard threshold, reporting only
};

struct TuneBounds {
  uint32_t max_bands = 1000;
  uint32_t max_rows = 500;
};

struct TuneResult {
  bool feasible = false;
  CurveSpec spec;
  double max_error = 0;  // max |F - F_target| over the grid
};

/// Max over J in {0, step, 2*step, ..., 1} of |F_{B,R}(J) - F_{B',R'}(J)|.
double curve_distance(uint32_t b1, uint32_t r1, uint32_t b2, uint32_t r2, double step = 0.01);

/// Smallest B (then smallest R) whose curve stays within epsilon of the
/// target's on the J grid. `feasible` is false when nothing in the bounds
/// qualifies.
TuneResult tune_parameters(const CurveSpec& target, const TuneBounds& bounds = {},
                           double epsilon = 0.05, double step = 0.01);

/// Writes "jaccard,probability" rows for J = 0, step, ..., 1.
void write_curve_csv(std::ostream& out, uint32_t bands, uint32_t rows, double step = 0.01);

struct AccuracyReport {
  size_t tp = 0;
  size_t fp = 0;
  size_t fn = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  bool precision_defined = true;  // false when nothing was reported
  bool recall_defined = true;     // false when the truth is empty
  std::optional<double> leakage;  // tau * |res| / N_r, when computed

  std::string to_text() const;
};

/// Scores reported (local id, peer id) pairs against the true pairs.
/// Throws std::invalid_argument when no ground truth is supplied.
AccuracyReport evaluate_accuracy(const std::vector<std::pair<std::string, std::string>>& reported,
                                 const std::optional<GroundTruth>& truth);

/// Upper bound on the fraction of the peer's records leaked through false
/// positives: tau * |res| / N_r.
double leakage_bound(double tau, size_t matched, size_t n_peer);

struct FalsePositiveOptions {
  size_t samples = 2000;
  uint64_t seed = 7;
  /// Perturbation rates used to generate near-miss pairs from the data.
  std::vector<double> rates = {0.3, 0.6, 0.9};
};

struct FalsePositiveEstimate {
  double tau = 0;        // P(LSH match | J < threshold)
  size_t negatives = 0;  // sampled pairs below the threshold
  size_t false_matches = 0;
};

/// Empirical false-positive rate of the LSH indicator: pairs of a record
/// and a perturbed or unrelated record are scored with the exact Jaccard
/// and with LSHMatch; pairs under `threshold` that still match count as
/// false positives. `ds` is taken raw and preprocessed here.
FalsePositiveEstimate estimate_false_positive_rate(const Dataset& ds,
                                                   const std::vector<FieldGroupSpec>& specs,
                                                   const LshParams& params, double threshold,
                                                   const FalsePositiveOptions& opts = {});

}  // namespace pprl
