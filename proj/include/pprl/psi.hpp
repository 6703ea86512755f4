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
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pprl/bytes.hpp"
#include "pprl/group.hpp"
#include "pprl/transport.hpp"

namespace pprl {

enum class Stage : uint8_t { kOnce, kTwice };

/// An ordered list of encrypted items, held in canonical encoding. Order is
/// significant: position p of a signature list is band p % B of block p / B.
struct EncryptedList {
  std::vector<ElementEncoding> items;
  Stage stage = Stage::kOnce;

  size_t size() const { return items.size(); }
  Bytes flat() const;
  /// Splits a received batch; decoding of the points is deferred until use.
  static EncryptedList from_flat(ByteView flat, Stage stage);
};

/// H(x)^sk for every item, in input order.
EncryptedList encrypt_own(const std::vector<Digest256>& items, const Scalar& sk,
                          std::string_view dst = kSignatureDst);
EncryptedList encrypt_own(const std::vector<std::string>& items, const Scalar& sk,
                          std::string_view dst = kSignatureDst);

/// A permutation of n_blocks blocks of block_size items each. Whole blocks
/// move together (inter-block), and the items inside every block are
/// shuffled independently (intra-block). Output position p takes the item at
/// input position source(p).
class BlockPermutation {
 public:
  static BlockPermutation identity(size_t n_blocks, size_t block_size);

  template <typename Urbg>
  static BlockPermutation random(size_t n_blocks, size_t block_size, Urbg& rng) {
    BlockPermutation p = identity(n_blocks, block_size);
    std::shuffle(p.blocks_.begin(), p.blocks_.end(), rng);
    for (size_t b = 0; b < n_blocks; ++b) {
      auto first = p.inner_.begin() + static_cast<std::ptrdiff_t>(b * block_size);
      std::shuffle(first, first + static_cast<std::ptrdiff_t>(block_size), rng);
    }
    return p;
  }

  size_t n_blocks() const { return blocks_.size(); }
  size_t block_size() const { return block_size_; }
  size_t size() const { return inner_.size(); }

  size_t source(size_t out_pos) const {
    const size_t b = out_pos / block_size_;
    return blocks_[b] * block_size_ + inner_[out_pos];
  }

  BlockPermutation inverse() const;

  template <typename T>
  std::vector<T> apply(const std::vector<T>& in) const {
    if (in.size() != size()) throw std::invalid_argument("permutation size mismatch");
    std::vector<T> out;
    out.reserve(in.size());
    for (size_t p = 0; p < in.size(); ++p) out.push_back(in[source(p)]);
    return out;
  }

 private:
  size_t block_size_ = 1;
  std::vector<uint32_t> blocks_;  // output block -> input block
  std::vector<uint32_t> inner_;   // output position -> offset inside the source block
};

/// Raises every peer item to sk. Items keep their order unless `perm` is
/// given, in which case the output is perm applied to the re-encrypted list.
/// Throws MalformedElementError when an item does not decode to a point.
EncryptedList reencrypt_peer(const EncryptedList& peer, const Scalar& sk,
                             const BlockPermutation* perm = nullptr);

struct EncodingHash {
  size_t operator()(const ElementEncoding& e) const noexcept {
    // Bytes 1..8 are the top of a uniformly distributed x-coordinate.
    size_t h = 0;
    for (size_t i = 1; i <= sizeof(size_t); ++i) h = (h << 8) | e[i];
    return h;
  }
};

/// Hashed index over a twice-encrypted list: encoding -> every position.
class ElementIndex {
 public:
  explicit ElementIndex(const EncryptedList& list);

  bool contains(const ElementEncoding& e) const { return map_.count(e) != 0; }
  /// Positions holding `e`, in increasing order; empty when absent.
  const std::vector<uint32_t>& positions(const ElementEncoding& e) const;

 private:
  std::unordered_map<ElementEncoding, std::vector<uint32_t>, EncodingHash> map_;
};

/// M[i] = 1 iff mine[i] occurs anywhere in theirs. Linear expected time.
std::vector<uint8_t> intersect(const EncryptedList& mine, const EncryptedList& theirs);

/// Outcome of one cardinality-only PSI run, as seen by the initiator.
struct Cardinality {
  size_t intersection = 0;
  size_t local_size = 0;
  size_t peer_size = 0;
};

/// Initiator side. `set_id` names the responder's set (for example a peer
/// record's block number). It travels in the first slot of PSI_CA_REQUEST as
/// 4 bytes big-endian followed by zero padding. Learns |S n R| and |R| only.
Cardinality psi_cardinality_initiate(Channel& ch, uint32_t set_id,
                                     const std::unordered_set<std::string>& mine,
                                     const Scalar& sk);

/// Returns the responder's set for a set id, or nullptr to refuse.
using SetLookup = std::function<const std::unordered_set<std::string>*(uint32_t)>;

/// Responder side, given the already-received first PSI_CA_REQUEST frame.
/// Re-encrypts and fully shuffles the initiator's items before returning
/// them, so only the count survives. Unknown set ids abort with kRefused.
void psi_cardinality_respond(Channel& ch, Frame request, const SetLookup& lookup,
                             const Scalar& sk);

}  // namespace pprl
