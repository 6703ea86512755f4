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

#include "pprl/psi.hpp"

#include <optional>

#include "pprl/parallel.hpp"

namespace pprl {

Bytes EncryptedList::flat() const {
  Bytes out;
  out.reserve(items.size() * kElementSize);
  for (const auto& e : items) out.insert(out.end(), e.begin(), e.end());
  return out;
}

EncryptedList EncryptedList::from_flat(ByteView flat, Stage stage) {
  if (flat.size() % kElementSize != 0) {
    throw ProtocolError(ErrorCode::kMalformedMessage,
                        "element list is not a multiple of the element size");
  }
  EncryptedList out;
  out.stage = stage;
  out.items.resize(flat.size() / kElementSize);
  for (size_t i = 0; i < out.items.size(); ++i) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(i * kElementSize), kElementSize,
                out.items[i].begin());
  }
  return out;
}

namespace {

template <typename Item>
EncryptedList encrypt_items(const std::vector<Item>& items, const Scalar& sk,
                            std::string_view dst) {
  EncryptedList out;
  out.stage = Stage::kOnce;
  out.items.resize(items.size());
  parallel_for(items.size(), [&](size_t i) {
    const auto& item = items[i];
    ByteView msg(reinterpret_cast<const uint8_t*>(item.data()), item.size());
    out.items[i] = serialize(exp(hash_to_group(msg, dst), sk));
  });
  return out;
}

}  // namespace

EncryptedList encrypt_own(const std::vector<Digest256>& items, const Scalar& sk,
                          std::string_view dst) {
  return encrypt_items(items, sk, dst);
}

EncryptedList encrypt_own(const std::vector<std::string>& items, const Scalar& sk,
                          std::string_view dst) {
  return encrypt_items(items, sk, dst);
}

BlockPermutation BlockPermutation::identity(size_t n_blocks, size_t block_size) {
  if (block_size == 0) throw std::invalid_argument("block size must be >= 1");
  BlockPermutation p;
  p.block_size_ = block_size;
  p.blocks_.resize(n_blocks);
  std::iota(p.blocks_.begin(), p.blocks_.end(), 0u);
  p.inner_.resize(n_blocks * block_size);
  for (size_t i = 0; i < p.inner_.size(); ++i) p.inner_[i] = static_cast<uint32_t>(i % block_size);
  return p;
}

BlockPermutation BlockPermutation::inverse() const {
  BlockPermutation inv = identity(n_blocks(), block_size_);
  for (size_t out_b = 0; out_b < blocks_.size(); ++out_b) {
    const uint32_t in_b = blocks_[out_b];
    inv.blocks_[in_b] = static_cast<uint32_t>(out_b);
    for (size_t j = 0; j < block_size_; ++j) {
      const uint32_t in_off = inner_[out_b * block_size_ + j];
      inv.inner_[in_b * block_size_ + in_off] = static_cast<uint32_t>(j);
    }
  }
  return inv;
}

EncryptedList reencrypt_peer(const EncryptedList& peer, const Scalar& sk,
                             const BlockPermutation* perm) {
  if (peer.stage != Stage::kOnce) {
    throw std::invalid_argument("re-encryption expects a once-encrypted list");
  }
  EncryptedList out;
  out.stage = Stage::kTwice;
  out.items.resize(peer.items.size());
  parallel_for(peer.items.size(), [&](size_t i) {
    out.items[i] = serialize(exp(deserialize(peer.items[i]), sk));
  });
  if (perm) out.items = perm->apply(out.items);
  return out;
}

ElementIndex::ElementIndex(const EncryptedList& list) {
  map_.reserve(list.items.size());
  for (size_t i = 0; i < list.items.size(); ++i) {
    map_[list.items[i]].push_back(static_cast<uint32_t>(i));
  }
}

const std::vector<uint32_t>& ElementIndex::positions(const ElementEncoding& e) const {
  static const std::vector<uint32_t> kNone;
  auto it = map_.find(e);
  return it == map_.end() ? kNone : it->second;
}

std::vector<uint8_t> intersect(const EncryptedList& mine, const EncryptedList& theirs) {
  std::unordered_set<ElementEncoding, EncodingHash> index(theirs.items.begin(),
                                                          theirs.items.end());
  std::vector<uint8_t> m(mine.items.size(), 0);
  for (size_t i = 0; i < mine.items.size(); ++i) m[i] = index.count(mine.items[i]) ? 1 : 0;
  return m;
}

namespace {

std::vector<std::string> sorted_items(const std::unordered_set<std::string>& s) {
  std::vector<std::string> v(s.begin(), s.end());
  std::sort(v.begin(), v.end());
  return v;
}

ElementEncoding set_id_slot(uint32_t id) {
  ElementEncoding slot{};
  Bytes be;
  put_u32_be(be, id);
  std::copy(be.begin(), be.end(), slot.begin());
  return slot;
}

}  // namespace

Cardinality psi_cardinality_initiate(Channel& ch, uint32_t set_id,
                                     const std::unordered_set<std::string>& mine,
                                     const Scalar& sk) {
  EncryptedList once = encrypt_own(sorted_items(mine), sk, kShingleDst);
  once.items.insert(once.items.begin(), set_id_slot(set_id));
  send_batch(ch, MessageType::kPsiCaRequest, once.flat(), kElementSize);

  EncryptedList mine_twice =
      EncryptedList::from_flat(recv_batch(ch, MessageType::kPsiCaReenc, kElementSize),
                               Stage::kTwice);
  EncryptedList theirs_once =
      EncryptedList::from_flat(recv_batch(ch, MessageType::kPsiCaPeer, kElementSize),
                               Stage::kOnce);
  if (mine_twice.size() != mine.size()) {
    throw ProtocolError(ErrorCode::kMalformedMessage, "re-encrypted shingle count differs");
  }
  EncryptedList theirs_twice;
  try {
    theirs_twice = reencrypt_peer(theirs_once, sk);
  } catch (const MalformedElementError& e) {
    throw ProtocolError(ErrorCode::kMalformedMessage, e.what());
  }
  const auto m = intersect(mine_twice, theirs_twice);
  Cardinality c;
  c.intersection = static_cast<size_t>(std::count(m.begin(), m.end(), uint8_t{1}));
  c.local_size = mine.size();
  c.peer_size = theirs_once.size();
  return c;
}

void psi_cardinality_respond(Channel& ch, Frame request, const SetLookup& lookup,
                             const Scalar& sk) {
  EncryptedList req = EncryptedList::from_flat(recv_batch(ch, std::move(request), kElementSize),
                                               Stage::kOnce);
  if (req.items.empty()) {
    throw ProtocolError(ErrorCode::kMalformedMessage, "PSI-CA request without a set id");
  }
  const ElementEncoding slot = req.items.front();
  req.items.erase(req.items.begin());
  const uint32_t set_id = get_u32_be(slot.data());
  if (slot != set_id_slot(set_id)) {
    ch.abort(ErrorCode::kMalformedMessage, "PSI-CA set id is not zero padded");
    throw ProtocolError(ErrorCode::kMalformedMessage, "PSI-CA set id is not zero padded");
  }
  const std::unordered_set<std::string>* theirs = lookup(set_id);
  if (!theirs) {
    ch.abort(ErrorCode::kRefused, "unknown PSI-CA set id");
    throw ProtocolError(ErrorCode::kRefused, "unknown PSI-CA set id");
  }
  SecureRng rng;
  EncryptedList twice;
  try {
    std::optional<BlockPermutation> shuffle;
    if (!req.items.empty()) shuffle = BlockPermutation::random(1, req.size(), rng);
    twice = reencrypt_peer(req, sk, shuffle ? &*shuffle : nullptr);
  } catch (const MalformedElementError& e) {
    ch.abort(ErrorCode::kMalformedMessage, e.what());
    throw ProtocolError(ErrorCode::kMalformedMessage, e.what());
  }
  send_batch(ch, MessageType::kPsiCaReenc, twice.flat(), kElementSize);
  // Own items go out in random order too, so positions say nothing about
  // which shingles matched.
  std::vector<std::string> own(theirs->begin(), theirs->end());
  std::shuffle(own.begin(), own.end(), rng);
  send_batch(ch, MessageType::kPsiCaPeer, encrypt_own(own, sk, kShingleDst).flat(),
             kElementSize);
}

}  // namespace pprl
