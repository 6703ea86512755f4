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

#include <gtest/gtest.h>

#include <future>
#include <map>
#include <random>
#include <set>
#include <thread>

#include "pprl/lsh.hpp"
#include "pprl/psi.hpp"

using namespace pprl;

TEST(Psi, SmallExample) {
  const Scalar a = keygen(), b = keygen();
  const EncryptedList mine = encrypt_own(std::vector<std::string>{"a", "b", "c"}, a);
  const EncryptedList theirs = encrypt_own(std::vector<std::string>{"b", "c", "d"}, b);
  const auto m = intersect(reencrypt_peer(mine, b), reencrypt_peer(theirs, a));
  EXPECT_EQ(m, (std::vector<uint8_t>{0, 1, 1}));
}

TEST(Psi, MatchesPlaintextIntersectionOnRandomInstances) {
  std::mt19937_64 rng(17);
  for (int inst = 0; inst < 100; ++inst) {
    const size_t universe = 2 + rng() % 511;
    auto draw = [&] {
      std::vector<std::string> v(1 + rng() % 24);
      for (auto& s : v) s = "u" + std::to_string(rng() % universe);
      return v;
    };
    const auto mine = draw();
    const auto theirs = draw();
    const Scalar a = keygen(), b = keygen();
    const auto m = intersect(reencrypt_peer(encrypt_own(mine, a), b),
                             reencrypt_peer(encrypt_own(theirs, b), a));
    const std::set<std::string> t(theirs.begin(), theirs.end());
    ASSERT_EQ(m.size(), mine.size());
    for (size_t i = 0; i < mine.size(); ++i) {
      EXPECT_EQ(m[i] == 1, t.count(mine[i]) == 1) << "instance " << inst << " item " << i;
    }
  }
}

TEST(Psi, OnceEncryptedItemsDoNotMatchAcrossKeys) {
  const Scalar a = keygen(), b = keygen();
  const auto x = encrypt_own(std::vector<std::string>{"same"}, a);
  const auto y = encrypt_own(std::vector<std::string>{"same"}, b);
  EXPECT_NE(x.items[0], y.items[0]);
  EXPECT_EQ(x.stage, Stage::kOnce);
  EXPECT_EQ(reencrypt_peer(x, b).stage, Stage::kTwice);
}

TEST(Psi, FlatRoundTrip) {
  const auto x = encrypt_own(std::vector<std::string>{"p", "q", "r"}, keygen());
  const Bytes flat = x.flat();
  EXPECT_EQ(flat.size(), 3 * kElementSize);
  const EncryptedList back = EncryptedList::from_flat(flat, Stage::kOnce);
  EXPECT_EQ(back.items, x.items);
  EXPECT_THROW(EncryptedList::from_flat(ByteView(flat.data(), flat.size() - 1), Stage::kOnce),
               std::exception);
}

TEST(Psi, ReencryptRejectsGarbage) {
  EncryptedList bad;
  bad.items.resize(1);
  EXPECT_THROW(reencrypt_peer(bad, keygen()), MalformedElementError);
}

TEST(BlockPermutationTest, InverseAndBlockStructure) {
  std::mt19937_64 rng(3);
  const BlockPermutation p = BlockPermutation::random(7, 5, rng);
  std::vector<int> in(35);
  for (int i = 0; i < 35; ++i) in[i] = i;
  const auto out = p.apply(in);
  EXPECT_EQ(p.inverse().apply(out), in);
  EXPECT_EQ(std::set<int>(out.begin(), out.end()).size(), 35u);
  // Every output block is a shuffle of exactly one input block.
  for (size_t b = 0; b < 7; ++b) {
    std::set<int> blocks;
    for (size_t i = 0; i < 5; ++i) blocks.insert(out[b * 5 + i] / 5);
    EXPECT_EQ(blocks.size(), 1u);
  }
  EXPECT_EQ(BlockPermutation::identity(3, 2).apply(std::vector<int>{1, 2, 3, 4, 5, 6}),
            (std::vector<int>{1, 2, 3, 4, 5, 6}));
  EXPECT_THROW(p.apply(std::vector<int>(3)), std::invalid_argument);
}

TEST(BlockPermutationTest, PreservesPerBlockHitCounts) {
  // The count variant permutes before the sender intersects; the multiset of
  // per-block hit counts must survive.
  std::mt19937_64 rng(9);
  const size_t blocks = 30, bands = 4;
  std::vector<uint8_t> m(blocks * bands);
  for (auto& v : m) v = static_cast<uint8_t>(rng() % 3 == 0);
  const BlockPermutation p = BlockPermutation::random(blocks, bands, rng);
  auto counts = [&](const std::vector<uint8_t>& v) {
    std::multiset<int> out;
    for (size_t b = 0; b < blocks; ++b) {
      int c = 0;
      for (size_t i = 0; i < bands; ++i) c += v[b * bands + i];
      out.insert(c);
    }
    return out;
  };
  EXPECT_EQ(counts(p.apply(m)), counts(m));
}

TEST(Psi, ReencryptWithPermutationEqualsPermutedReencryption) {
  std::mt19937_64 rng(4);
  const Scalar a = keygen(), b = keygen();
  std::vector<std::string> items;
  for (int i = 0; i < 12; ++i) items.push_back("i" + std::to_string(i));
  const EncryptedList once = encrypt_own(items, a);
  const BlockPermutation p = BlockPermutation::random(4, 3, rng);
  EXPECT_EQ(reencrypt_peer(once, b, &p).items, p.apply(reencrypt_peer(once, b).items));
}

TEST(ElementIndexTest, Positions) {
  const Scalar a = keygen();
  const EncryptedList l = encrypt_own(std::vector<std::string>{"x", "y", "x"}, a);
  const ElementIndex idx(l);
  EXPECT_EQ(idx.positions(l.items[0]), (std::vector<uint32_t>{0, 2}));
  EXPECT_EQ(idx.positions(l.items[1]), (std::vector<uint32_t>{1}));
  const auto z = encrypt_own(std::vector<std::string>{"z"}, a);
  EXPECT_FALSE(idx.contains(z.items[0]));
  EXPECT_TRUE(idx.positions(z.items[0]).empty());
}

namespace {

Cardinality run_psi_ca(const std::unordered_set<std::string>& mine,
                       const std::unordered_set<std::string>& theirs, bool known_set) {
  auto [ci, cr] = make_loopback_pair();
  const uint32_t known = 7;
  const uint32_t asked = known_set ? known : 8;
  std::exception_ptr responder_error;
  std::thread responder([&, ch = cr.get()] {
    try {
      Frame f = ch->recv();
      psi_cardinality_respond(
          *ch, std::move(f),
          [&](uint32_t id) { return id == known ? &theirs : nullptr; }, keygen());
    } catch (...) {
      responder_error = std::current_exception();
    }
  });
  Cardinality c;
  try {
    c = psi_cardinality_initiate(*ci, asked, mine, keygen());
  } catch (...) {
    responder.join();
    throw;
  }
  responder.join();
  if (responder_error) std::rethrow_exception(responder_error);
  return c;
}

}  // namespace

TEST(PsiCardinality, StreetExampleGivesFifteen) {
  const auto a = shingle_set(normalize_text("Sunset Blvd, Los Angeles"), 5);
  const auto b = shingle_set(normalize_text("Sunet Blvd, Los Angeles"), 5);
  const Cardinality c = run_psi_ca(a, b, true);
  EXPECT_EQ(c.intersection, 15u);
  EXPECT_EQ(c.local_size, 19u);
  EXPECT_EQ(c.peer_size, 18u);
}

TEST(PsiCardinality, EmptySides) {
  EXPECT_EQ(run_psi_ca({}, {"a", "b"}, true).intersection, 0u);
  EXPECT_EQ(run_psi_ca({"a"}, {}, true).peer_size, 0u);
}

TEST(PsiCardinality, UnknownSetIsRefused) {
  try {
    run_psi_ca({"a"}, {"a"}, false);
    FAIL() << "expected a refusal";
  } catch (const ProtocolError& e) {
    EXPECT_TRUE(e.code() == ErrorCode::kRefused || e.code() == ErrorCode::kPeerAborted);
  }
}

TEST(PsiCardinality, PaddedSetIdIsChecked) {
  auto [ci, cr] = make_loopback_pair();
  auto responder = std::async(std::launch::async, [&, ch = cr.get()] {
    try {
      psi_cardinality_respond(
          *ch, ch->recv(), [](uint32_t) -> const std::unordered_set<std::string>* { return nullptr; },
          keygen());
    } catch (const ProtocolError& e) {
      return e.code();
    }
    return ErrorCode::kRefused;
  });
  ElementEncoding slot{};
  slot[kElementSize - 1] = 1;
  send_batch(*ci, MessageType::kPsiCaRequest, ByteView(slot.data(), slot.size()), kElementSize);
  EXPECT_EQ(responder.get(), ErrorCode::kMalformedMessage);
}
