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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pprl/config.hpp"
#include "pprl/core_model.hpp"
#include "pprl/group.hpp"
#include "pprl/lsh.hpp"
#include "pprl/transport.hpp"

namespace pprl {

enum class Variant : uint8_t {
  kBase = 0,       // sender learns matched pairs, receiver learns N_s
  kMutual = 1,     // both parties learn their matched pairs
  kCount = 2,      // sender learns only the number of matched records
  kRevealing = 3,  // base, plus the sender receives the matched peer records
};

std::string to_string(Variant v);
/// Accepts "base", "mutual", "count", "revealing".
Variant parse_variant(const std::string& name);

enum class Role { kSender, kReceiver };

struct ProtocolConfig {
  Variant variant = Variant::kBase;
  LinkageConfig linkage;
  /// Sender only: run cardinality PSI over the shingles of every matched
  /// pair to obtain its exact Jaccard index.
  bool exact_jaccard = false;

  /// Replaces the CSPRNG for the session key and the record permutation.
  /// For reproducible tests only; production sessions leave it unset.
  std::optional<Bytes> fixed_entropy;
  /// Called with the session key right after it is drawn. Test hook.
  std::function<void(const Scalar&)> on_session_key;
};

/// A dataset after preprocessing and deduplication, with the position of
/// every kept record in the caller's dataset.
struct PreparedDataset {
  Dataset records;             // preprocessed
  std::vector<size_t> source;  // records[i] came from input index source[i]
};

PreparedDataset prepare(const Dataset& raw, const std::vector<FieldGroupSpec>& specs);

/// L of length B*N: block i holds the B band signatures of record pi[i].
/// Throws EmptyRecordError for a record without shingles.
std::vector<BandSignature> build_signature_array(const Dataset& preprocessed,
                                                 const LshEngine& engine,
                                                 const std::vector<size_t>& pi);

Handshake make_handshake(const ProtocolConfig& cfg, uint64_t n);
/// Throws ProtocolError with kVersionMismatch, kVariantMismatch or
/// kDigestMismatch.
void verify_handshake(const Handshake& mine, const Handshake& theirs);

/// Number of B-sized blocks of M holding at least one hit. Throws
/// std::invalid_argument when |M| is not a multiple of B.
size_t count_matches(const std::vector<uint8_t>& m, size_t bands);

/// Both functions consume `raw` as given; MatchPair::local_index refers to
/// positions in it. Any failure throws ProtocolError after a best-effort
/// ABORT to the peer, and no partial result is returned.
MatchResult run_sender(const Dataset& raw, const ProtocolConfig& cfg, Channel& ch);
MatchResult run_receiver(const Dataset& raw, const ProtocolConfig& cfg, Channel& ch);
MatchResult run_party(Role role, const Dataset& raw, const ProtocolConfig& cfg, Channel& ch);

struct LoopbackOutcome {
  MatchResult sender;
  MatchResult receiver;
};

/// Runs both roles in one process over a loopback channel pair, the
/// receiver on a second thread. `receiver_cfg` defaults to `cfg`. If either
/// side fails, both channels are closed and the first error is rethrown.
LoopbackOutcome run_loopback(const Dataset& sender_data, const Dataset& receiver_data,
                             const ProtocolConfig& cfg,
                             const ProtocolConfig* receiver_cfg = nullptr);

/// Wire form of REVEAL_RESPONSE: u32 count, then per record u32 field count
/// and length-prefixed (name, value) pairs.
Bytes encode_records(const std::vector<Record>& records);
std::vector<Record> decode_records(ByteView payload);

}  // namespace pprl
