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

#include "pprl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pprl {

double match_probability(double j, uint32_t bands, uint32_t rows) {
  if (j <= 0) return 0.0;
  if (j >= 1) return 1.0;
  const double jr = std::pow(j, static_cast<double>(rows));
  return -std::expm1(static_cast<double>(bands) * std::log1p(-jr));
}

double curve_threshold(uint32_t bands, uint32_t rows) {
  return std::pow(1.0 / static_cast<double>(bands), 1.0 / static_cast<double>(rows));
}

double z_for_confidence(double confidence) {
  if (!(confidence > 0 && confidence < 1)) {
    throw std::invalid_argument("confidence must be in (0, 1)");
  }
  // P(|Z| <= z) = erf(z / sqrt(2)) is increasing in z; bisect.
  double lo = 0, hi = 40;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (std::erf(mid / std::sqrt(2.0)) < confidence) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

JaccardInterval estimate_jaccard_interval(uint32_t hits, uint32_t bands, uint32_t rows,
                                          double confidence) {
  if (bands == 0 || rows == 0) throw std::invalid_argument("bands and rows must be >= 1");
  if (hits > bands) throw std::invalid_argument("hit count exceeds the number of bands");
  const double z = z_for_confidence(confidence);
  const double b = bands;
  const double h = hits;
  const double t = b - h;
  const double p = h / b;
  const double half = z * std::sqrt(t * h / (b * b * b));
  const double inv_r = 1.0 / static_cast<double>(rows);
  JaccardInterval iv;
  iv.lo = std::clamp(std::pow(std::fabs(p - half), inv_r), 0.0, 1.0);
  iv.hi = std::clamp(std::pow(std::fabs(p + half), inv_r), 0.0, 1.0);
  return iv;
}

double curve_distance(uint32_t b1, uint32_t r1, uint32_t b2, uint32_t r2, double step) {
  const int steps = static_cast<int>(std::lround(1.0 / step));
  double worst = 0;
  for (int i = 0; i <= steps; ++i) {
    const double j = std::min(1.0, i * step);
    worst = std::max(worst, std::fabs(match_probability(j, b1, r1) -
                                      match_probability(j, b2, r2)));
  }
  return worst;
}

TuneResult tune_parameters(const CurveSpec& target, const TuneBounds& bounds, double epsilon,
                           double step) {
  if (target.bands == 0 || target.rows == 0) {
    throw std::invalid_argument("target bands and rows must be >= 1");
  }
  if (!(step > 0 && step <= 1)) throw std::invalid_argument("grid step must be in (0, 1]");
  TuneResult res;
  for (uint32_t b = 1; b <= bounds.max_bands; ++b) {
    for (uint32_t r = 1; r <= bounds.max_rows; ++r) {
      const double d = curve_distance(b, r, target.bands, target.rows, step);
      if (d <= epsilon) {
        res.feasible = true;
        res.spec = {b, r, target.threshold};
        res.max_error = d;
        return res;
      }
    }
  }
  return res;
}

void write_curve_csv(std::ostream& out, uint32_t bands, uint32_t rows, double step) {
  const int steps = static_cast<int>(std::lround(1.0 / step));
  out << "jaccard,probability\n";
  for (int i = 0; i <= steps; ++i) {
    const double j = std::min(1.0, i * step);
    out << j << ',' << match_probability(j, bands, rows) << '\n';
  }
}

std::string AccuracyReport::to_text() const {
  std::ostringstream os;
  os << "tp=" << tp << "\nfp=" << fp << "\nfn=" << fn << "\nprecision=" << precision
     << (precision_defined ? "" : " (undefined: no matches reported)") << "\nrecall=" << recall
     << (recall_defined ? "" : " (undefined: empty ground truth)") << "\nf1=" << f1 << '\n';
  if (leakage) os << "leakage_estimate=" << *leakage << '\n';
  return os.str();
}

AccuracyReport evaluate_accuracy(const std::vector<std::pair<std::string, std::string>>& reported,
                                 const std::optional<GroundTruth>& truth) {
  if (!truth) throw std::invalid_argument("ground truth is required for scoring");
  const std::set<std::pair<std::string, std::string>> want(truth->begin(), truth->end());
  const std::set<std::pair<std::string, std::string>> got(reported.begin(), reported.end());
  AccuracyReport r;
  for (const auto& p : got) {
    if (want.count(p)) {
      ++r.tp;
    } else {
      ++r.fp;
    }
  }
  r.fn = want.size() - r.tp;
  r.precision_defined = !got.empty();
  r.recall_defined = !want.empty();
  r.precision = r.precision_defined ? static_cast<double>(r.tp) / static_cast<double>(got.size())
                                    : 0.0;
  r.recall = r.recall_defined ? static_cast<double>(r.tp) / static_cast<double>(want.size())
                              : 0.0;
  r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall)
                                    : 0.0;
  return r;
}

double leakage_bound(double tau, size_t matched, size_t n_peer) {
  if (n_peer == 0) return 0.0;
  return tau * static_cast<double>(matched) / static_cast<double>(n_peer);
}

FalsePositiveEstimate estimate_false_positive_rate(const Dataset& ds,
                                                   const std::vector<FieldGroupSpec>& specs,
                                                   const LshParams& params, double threshold,
                                                   const FalsePositiveOptions& opts) {
  FalsePositiveEstimate est;
  if (ds.empty()) return est;
  LshEngine engine(params, specs);
  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<size_t> pick(0, ds.size() - 1);
  const size_t kinds = opts.rates.size() + 1;
  for (size_t i = 0; i < opts.samples; ++i) {
    const Record& a = ds.records[pick(rng)];
    const size_t kind = i % kinds;
    Record b = kind < opts.rates.size() ? perturb(a, opts.rates[kind], rng)
                                        : ds.records[pick(rng)];
    const Record pa = preprocess(a, specs);
    const Record pb = preprocess(b, specs);
    if (jaccard(pa, pb, specs).value() >= threshold) continue;
    try {
      const bool m = lsh_match(engine.signatures(pa), engine.signatures(pb)).matched;
      ++est.negatives;
      if (m) ++est.false_matches;
    } catch (const EmptyRecordError&) {
    }
  }
  est.tau = est.negatives == 0 ? 0.0
                               : static_cast<double>(est.false_matches) /
                                     static_cast<double>(est.negatives);
  return est;
}

}  // namespace pprl
