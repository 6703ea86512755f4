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

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "pprl/bytes.hpp"
#include "pprl/core_model.hpp"

namespace pprl {

/// Modulus of the universal hash family (a Mersenne prime).
inline constexpr uint64_t kMersennePrime = (uint64_t{1} << 61) - 1;
/// Range of the reduced hash values, [0, 2^32].
inline constexpr uint64_t kMaxHashValue = uint64_t{1} << 32;

struct LshParams {
  uint32_t bands = 20;  // B
  uint32_t rows = 5;    // R
  Digest256 seed{};     // shared by both parties

  uint32_t total_hashes() const { return bands * rows; }
  bool operator==(const LshParams&) const = default;
};

/// Throws std::invalid_argument unless bands, rows >= 1.
void validate(const LshParams& params);

/// Universal-hash coefficients for all B*R Min-Hash functions, indexed
/// [band * R + row]. c[i] in [1, MP], d[i] in [0, MP].
struct HashCoeffs {
  std::vector<uint64_t> c;
  std::vector<uint64_t> d;

  /// Deterministic HMAC-SHA-256 stream keyed by the seed; both parties
  /// derive identical coefficients from identical params.
  static HashCoeffs derive(const LshParams& params);
};

struct WeightedShingle {
  std::string sh;
  uint32_t w = 1;
  bool operator==(const WeightedShingle&) const = default;
};

/// A concatenated group string with the shingle length and weight of its
/// group.
struct FieldGroup {
  std::string text;
  uint32_t k = 1;
  uint32_t w = 1;
};

using BandSignature = Digest256;
using BandSignatureList = std::vector<BandSignature>;

/// All overlapping k-code-point substrings of `s`, in order, duplicates kept.
std::vector<std::string> shingles(std::string_view s, uint32_t k);

/// Distinct shingles; the set form used for Jaccard.
std::unordered_set<std::string> shingle_set(std::string_view s, uint32_t k);

struct JaccardRatio {
  size_t intersection = 0;
  size_t union_size = 0;

  /// 1 when both sets are empty.
  double value() const {
    return union_size == 0 ? 1.0
                           : static_cast<double>(intersection) / static_cast<double>(union_size);
  }
  bool operator==(const JaccardRatio&) const = default;
};

JaccardRatio jaccard(const std::unordered_set<std::string>& a,
                     const std::unordered_set<std::string>& b);
JaccardRatio jaccard(std::string_view a, std::string_view b, uint32_t k);

/// Shingle set of a preprocessed record: every group's shingles tagged with
/// the group index so equal substrings of different groups stay distinct.
std::unordered_set<std::string> record_shingle_set(const Record& record,
                                                   const std::vector<FieldGroupSpec>& specs);
JaccardRatio jaccard(const Record& a, const Record& b, const std::vector<FieldGroupSpec>& specs);

/// Concatenates each group's member fields in listed order; missing fields are
/// empty.
std::vector<FieldGroup> field_groups(const Record& record,
                                     const std::vector<FieldGroupSpec>& specs);

std::vector<WeightedShingle> get_weighted_shingles(std::span<const FieldGroup> groups);

/// First four bytes of SHA-256(shingle), big-endian.
uint32_t shingle_digest(std::string_view sh);

/// One universal hash (h*c + d mod MP) mod 2^32, then reshaped so that the
/// result is distributed like the minimum of w independent hashes. The w = 1
/// path is pure integer arithmetic.
uint64_t calc_h(uint32_t h, uint64_t c, uint64_t d, uint32_t w);

/// Weighted Min-Hash band signatures over an explicit shingle list.
/// Signature b is SHA-256 over the 4-byte band index b followed by the R
/// minima, each as an 8-byte big-endian integer.
/// Throws std::invalid_argument when the list is empty.
BandSignatureList lsh_shingles(std::span<const WeightedShingle> shingles,
                               const LshParams& params, const HashCoeffs& coeffs);

/// The B per-band Min-Hash rows, before signature hashing. Exposed for the
/// distributional checks.
std::vector<uint64_t> minhash_rows(std::span<const WeightedShingle> shingles,
                                   const LshParams& params, const HashCoeffs& coeffs);

/// Band signatures of a preprocessed record. Throws EmptyRecordError when no
/// group yields a shingle.
BandSignatureList lsh_record(const Record& record, const std::vector<FieldGroupSpec>& specs,
                             const LshParams& params, const HashCoeffs& coeffs);

struct LshMatch {
  bool matched = false;
  uint32_t hits = 0;
};

/// Positional comparison; throws std::invalid_argument on length mismatch.
LshMatch lsh_match(const BandSignatureList& a, const BandSignatureList& b);

class EmptyRecordError : public std::runtime_error {
 public:
  explicit EmptyRecordError(const std::string& id)
      : std::runtime_error("empty record '" + id + "': no shingles in any group"), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

/// Coefficients derived once and reused for every record.
class LshEngine {
 public:
  LshEngine(LshParams params, std::vector<FieldGroupSpec> specs);

  const LshParams& params() const { return params_; }
  const std::vector<FieldGroupSpec>& specs() const { return specs_; }
  const HashCoeffs& coeffs() const { return coeffs_; }

  BandSignatureList signatures(const Record& preprocessed) const;

 private:
  LshParams params_;
  std::vector<FieldGroupSpec> specs_;
  HashCoeffs coeffs_;
};

}  // namespace pprl
