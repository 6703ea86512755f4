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

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pprl/bytes.hpp"

namespace pprl {

/// One row of a party's private dataset. The id is local and never leaves
/// the party that owns the record.
struct Record {
  std::string id;
  std::map<std::string, std::string> fields;

  const std::string* field(const std::string& name) const;
  bool operator==(const Record&) const = default;
};

/// A group of fields that are concatenated and shingled together, with the
/// shingle length k and an integer weight w.
struct FieldGroupSpec {
  std::string name;
  std::vector<std::string> members;
  uint32_t k = 3;
  uint32_t w = 1;

  bool operator==(const FieldGroupSpec&) const = default;
};

/// Throws std::invalid_argument if a field appears in two groups, a group is
/// empty, or k / w is zero.
void validate_specs(const std::vector<FieldGroupSpec>& specs);

struct Dataset {
  std::vector<Record> records;

  size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

/// Lower-cases, strips non-alphanumerics, collapses whitespace runs to a
/// single ASCII space and trims. Digits and non-ASCII letters survive.
std::string normalize_text(std::string_view text);

/// Normalizes every grouped field and drops fields outside all groups.
/// Grouped fields missing from the record come back as empty strings.
Record preprocess(const Record& record, const std::vector<FieldGroupSpec>& specs);
Dataset preprocess(const Dataset& ds, const std::vector<FieldGroupSpec>& specs);

/// Key that identifies a record for deduplication: the normalized grouped
/// fields in group order, separated by U+001F.
std::string dedup_key(const Record& record, const std::vector<FieldGroupSpec>& specs);

/// Keeps the first record of every dedup_key class, preserving order.
Dataset deduplicate(const Dataset& ds, const std::vector<FieldGroupSpec>& specs);

/// Splits UTF-8 text into code points (as UTF-8 substrings). Invalid bytes
/// become single-byte units.
std::vector<std::string_view> utf8_units(std::string_view text);

/// One reported pair (local record, peer record) from a linkage session.
struct MatchPair {
  size_t local_index = 0;  // index into the caller's input dataset
  std::string local_id;
  uint32_t peer_block = 0;  // peer's permuted record position
  uint32_t hits = 0;        // band hits between the two records, in [1, B]

  bool operator==(const MatchPair&) const = default;
};

struct SessionStats {
  uint64_t bytes_sent = 0;
  uint64_t bytes_received = 0;
  double comm_seconds = 0;
  double offline_seconds = 0;
  double total_seconds = 0;
};

/// Exact Jaccard of one matched pair, obtained via cardinality-only PSI.
struct ExactJaccard {
  size_t pair_index = 0;
  size_t intersection = 0;
  size_t local_size = 0;
  size_t peer_size = 0;
  double value() const;
};

struct MatchResult {
  std::vector<MatchPair> pairs;
  size_t n_local = 0;
  size_t n_peer = 0;
  /// Set only by the count-only variant; pairs stay empty then.
  std::optional<size_t> match_count;
  /// Revealing variant, sender side: peer plaintext per pair, same order.
  std::vector<Record> revealed;
  /// Revealing variant, receiver side: indices of own records disclosed.
  std::vector<size_t> disclosed;
  std::vector<ExactJaccard> exact;
  SessionStats stats;
  /// Input index of the own record at each block of this session's permuted
  /// signature array. Local knowledge; never sent.
  std::vector<size_t> block_records;

  /// Distinct local records with at least one match (|res| of the base
  /// protocol).
  size_t matched_records() const;
  /// Band hits summed over all pairs of one local record.
  uint32_t record_hits(size_t local_index) const;
};

}  // namespace pprl
