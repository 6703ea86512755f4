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

#include <algorithm>
#include <future>
#include <mutex>
#include <set>
#include <thread>

#include "pprl/protocol.hpp"
#include "pprl/psi.hpp"
#include "pprl/synth.hpp"
#include "test_support.hpp"

using namespace pprl;

namespace {

ProtocolConfig small_config(Variant v = Variant::kBase, uint64_t seed = 1) {
  ProtocolConfig cfg;
  cfg.variant = v;
  cfg.linkage = synthetic_config(seed);
  cfg.linkage.lsh.bands = 6;
  cfg.linkage.lsh.rows = 3;
  return cfg;
}

SynthData small_data(size_t n = 40, size_t planted = 8, uint64_t seed = 5) {
  SynthOptions o;
  o.n = n;
  o.planted = planted;
  o.seed = seed;
  return generate_synthetic(o);
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ProtocolError& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a ProtocolError";
  return ErrorCode::kRefused;
}

using PairSet = std::set<std::tuple<size_t, size_t, uint32_t>>;

// (sender input index, receiver input index, hits) from a plaintext
// all-pairs comparison.
PairSet plaintext_pairs(const Dataset& a, const Dataset& b, const LinkageConfig& lk) {
  LshEngine engine(lk.lsh, lk.groups);
  auto sigs = [&](const Dataset& d) {
    std::vector<BandSignatureList> out;
    for (const auto& r : d.records) out.push_back(engine.signatures(preprocess(r, lk.groups)));
    return out;
  };
  const auto sa = sigs(a), sb = sigs(b);
  PairSet out;
  for (size_t i = 0; i < sa.size(); ++i) {
    for (size_t j = 0; j < sb.size(); ++j) {
      const LshMatch m = lsh_match(sa[i], sb[j]);
      if (m.matched) out.insert({i, j, m.hits});
    }
  }
  return out;
}

PairSet protocol_pairs(const LoopbackOutcome& o) {
  PairSet out;
  for (const auto& p : o.sender.pairs) {
    out.insert({p.local_index, o.receiver.block_records.at(p.peer_block), p.hits});
  }
  return out;
}

}  // namespace

TEST(VariantTest, Names) {
  for (Variant v : {Variant::kBase, Variant::kMutual, Variant::kCount, Variant::kRevealing}) {
    EXPECT_EQ(parse_variant(to_string(v)), v);
  }
  EXPECT_THROW(parse_variant("bogus"), std::invalid_argument);
}

TEST(Prepare, DedupKeepsSourceIndices) {
  const auto cfg = small_config();
  Dataset d = small_data(5, 0).a;
  d.records.insert(d.records.begin() + 2, d.records[0]);
  d.records[2].id = "copy";
  const PreparedDataset p = prepare(d, cfg.linkage.groups);
  ASSERT_EQ(p.records.size(), 5u);
  EXPECT_EQ(p.source, (std::vector<size_t>{0, 1, 3, 4, 5}));
  EXPECT_EQ(p.records.records[2].id, d.records[3].id);
}

TEST(SignatureArray, BlockLayout) {
  const auto cfg = small_config();
  const Dataset d = preprocess(small_data(4, 0).a, cfg.linkage.groups);
  LshEngine engine(cfg.linkage.lsh, cfg.linkage.groups);
  const std::vector<size_t> pi = {2, 0, 3, 1};
  const auto l = build_signature_array(d, engine, pi);
  ASSERT_EQ(l.size(), 4u * 6u);
  for (size_t blk = 0; blk < 4; ++blk) {
    const auto sigs = engine.signatures(d.records[pi[blk]]);
    for (size_t b = 0; b < 6; ++b) EXPECT_EQ(l[blk * 6 + b], sigs[b]);
  }
}

TEST(CountMatches, Blocks) {
  EXPECT_EQ(count_matches({0, 1, 0, 0, 0, 0, 1, 1, 0}, 3), 2u);
  EXPECT_EQ(count_matches({}, 3), 0u);
  EXPECT_EQ(count_matches({1, 1}, 1), 2u);
  EXPECT_THROW(count_matches({0, 1}, 3), std::invalid_argument);
}

TEST(HandshakeCheck, OrderOfChecks) {
  const auto cfg = small_config();
  const Handshake mine = make_handshake(cfg, 10);
  EXPECT_EQ(mine.n, 10u);
  EXPECT_NO_THROW(verify_handshake(mine, make_handshake(cfg, 99)));
  Handshake t = mine;
  t.version = 2;
  t.variant = 1;
  EXPECT_EQ(code_of([&] { verify_handshake(mine, t); }), ErrorCode::kVersionMismatch);
  t = mine;
  t.variant = 2;
  t.params_digest[0] ^= 1;
  EXPECT_EQ(code_of([&] { verify_handshake(mine, t); }), ErrorCode::kVariantMismatch);
  t = mine;
  t.params_digest[0] ^= 1;
  EXPECT_EQ(code_of([&] { verify_handshake(mine, t); }), ErrorCode::kDigestMismatch);
  t = mine;
  t.spec_digest[5] ^= 1;
  EXPECT_EQ(code_of([&] { verify_handshake(mine, t); }), ErrorCode::kDigestMismatch);
}

TEST(Session, MismatchedParametersAbortBothSides) {
  const SynthData d = small_data();
  const auto a = small_config();
  auto b = small_config();
  b.linkage.lsh.rows = 4;
  EXPECT_EQ(code_of([&] { run_loopback(d.a, d.b, a, &b); }), ErrorCode::kDigestMismatch);
  b = small_config(Variant::kMutual);
  EXPECT_EQ(code_of([&] { run_loopback(d.a, d.b, a, &b); }), ErrorCode::kVariantMismatch);
  b = small_config();
  b.linkage.groups[0].k = 3;
  EXPECT_EQ(code_of([&] { run_loopback(d.a, d.b, a, &b); }), ErrorCode::kDigestMismatch);
}

TEST(Session, BaseMatchesPlaintextOracle) {
  const SynthData d = small_data(60, 10, 8);
  const auto cfg = small_config(Variant::kBase, 8);
  const LoopbackOutcome o = run_loopback(d.a, d.b, cfg);
  EXPECT_EQ(protocol_pairs(o), plaintext_pairs(d.a, d.b, cfg.linkage));
  EXPECT_EQ(o.sender.n_local, 60u);
  EXPECT_EQ(o.sender.n_peer, 60u);
  EXPECT_EQ(o.receiver.n_peer, 60u);
  EXPECT_TRUE(o.receiver.pairs.empty());
  for (const auto& p : o.sender.pairs) {
    EXPECT_GE(p.hits, 1u);
    EXPECT_LE(p.hits, 6u);
    EXPECT_EQ(p.local_id, d.a.records[p.local_index].id);
    EXPECT_LT(p.peer_block, 60u);
  }
}

TEST(Session, PlantedPairsAreFoundWithDefaultSchema) {
  const SynthData d = small_data(100, 20, 21);
  ProtocolConfig cfg;
  cfg.linkage = synthetic_config(21);
  const LoopbackOutcome o = run_loopback(d.a, d.b, cfg);
  std::set<std::pair<std::string, std::string>> found;
  for (const auto& p : o.sender.pairs) {
    found.insert({p.local_id, d.b.records[o.receiver.block_records[p.peer_block]].id});
  }
  for (const auto& t : d.truth) EXPECT_TRUE(found.count(t)) << t.first << " " << t.second;
}

TEST(Session, CountMutualRevealingAgreeWithBase) {
  const SynthData d = small_data(50, 10, 9);
  const auto base = run_loopback(d.a, d.b, small_config(Variant::kBase, 9));
  const auto count = run_loopback(d.a, d.b, small_config(Variant::kCount, 9));
  ASSERT_TRUE(count.sender.match_count.has_value());
  EXPECT_EQ(*count.sender.match_count, base.sender.matched_records());
  EXPECT_TRUE(count.sender.pairs.empty());

  const auto mutual = run_loopback(d.a, d.b, small_config(Variant::kMutual, 9));
  PairSet s_view = protocol_pairs(mutual), r_view;
  for (const auto& p : mutual.receiver.pairs) {
    r_view.insert({mutual.sender.block_records.at(p.peer_block), p.local_index, p.hits});
  }
  EXPECT_EQ(s_view, r_view);
  EXPECT_EQ(s_view, protocol_pairs(base));

  const auto rev = run_loopback(d.a, d.b, small_config(Variant::kRevealing, 9));
  ASSERT_EQ(rev.sender.revealed.size(), rev.sender.pairs.size());
  for (size_t i = 0; i < rev.sender.pairs.size(); ++i) {
    const size_t r_idx = rev.receiver.block_records.at(rev.sender.pairs[i].peer_block);
    EXPECT_EQ(rev.sender.revealed[i].fields, d.b.records[r_idx].fields);
    EXPECT_TRUE(rev.sender.revealed[i].id.empty());
  }
  EXPECT_EQ(rev.receiver.disclosed.size(), rev.sender.pairs.size());
}

TEST(Session, ExactJaccardMatchesPlaintext) {
  const SynthData d = small_data(30, 10, 4);
  auto cfg = small_config(Variant::kBase, 4);
  cfg.exact_jaccard = true;
  const auto o = run_loopback(d.a, d.b, cfg);
  ASSERT_EQ(o.sender.exact.size(), o.sender.pairs.size());
  ASSERT_FALSE(o.sender.pairs.empty());
  for (const auto& e : o.sender.exact) {
    const auto& p = o.sender.pairs[e.pair_index];
    const Record a = preprocess(d.a.records[p.local_index], cfg.linkage.groups);
    const Record b =
        preprocess(d.b.records[o.receiver.block_records[p.peer_block]], cfg.linkage.groups);
    const JaccardRatio want = jaccard(a, b, cfg.linkage.groups);
    EXPECT_EQ(e.intersection, want.intersection);
    EXPECT_EQ(e.local_size + e.peer_size - e.intersection, want.union_size);
  }
}

TEST(Session, AllMessageTypesAreUsed) {
  const SynthData d = small_data(20, 5, 2);
  auto cfg = small_config(Variant::kRevealing, 2);
  cfg.exact_jaccard = true;
  auto [cs, cr] = make_loopback_pair();
  auto receiver = std::async(std::launch::async,
                             [&, ch = cr.get()] { return run_receiver(d.b, cfg, *ch); });
  const MatchResult s = run_sender(d.a, cfg, *cs);
  receiver.get();
  ASSERT_FALSE(s.pairs.empty());
  std::set<MessageType> seen = cs->stats().types_sent;
  seen.insert(cr->stats().types_sent.begin(), cr->stats().types_sent.end());
  for (uint8_t code = 1; code <= 0x0b; ++code) {
    EXPECT_TRUE(seen.count(static_cast<MessageType>(code))) << static_cast<int>(code);
  }
}

TEST(Session, FreshKeysPerSession) {
  const SynthData d = small_data(4, 1, 3);
  std::set<std::string> keys;
  auto cfg = small_config();
  std::mutex mu;
  cfg.on_session_key = [&](const Scalar& k) {
    std::lock_guard lock(mu);
    keys.insert(to_hex(k.to_bytes()));
  };
  for (int i = 0; i < 20; ++i) run_loopback(d.a, d.b, cfg);
  EXPECT_EQ(keys.size(), 40u);
}

TEST(Session, FixedEntropyIsReproducible) {
  const SynthData d = small_data(20, 5, 3);
  auto cfg = small_config();
  cfg.fixed_entropy = Bytes{1, 2, 3};
  const auto a = run_loopback(d.a, d.b, cfg);
  const auto b = run_loopback(d.a, d.b, cfg);
  EXPECT_EQ(a.sender.pairs, b.sender.pairs);
  EXPECT_EQ(a.receiver.block_records, b.receiver.block_records);
}

TEST(Session, EmptyRecordAborts) {
  SynthData d = small_data(10, 2, 3);
  Record empty;
  empty.id = "blank";
  d.a.records.push_back(empty);
  EXPECT_EQ(code_of([&] { run_loopback(d.a, d.b, small_config()); }), ErrorCode::kEmptyRecord);
}

TEST(Session, EmptyDatasetsGiveEmptyResults) {
  const SynthData d = small_data(10, 2, 3);
  const auto o = run_loopback(Dataset{}, d.b, small_config());
  EXPECT_TRUE(o.sender.pairs.empty());
  EXPECT_EQ(o.receiver.n_peer, 0u);
  const auto p = run_loopback(d.a, Dataset{}, small_config(Variant::kCount));
  EXPECT_EQ(p.sender.match_count, std::optional<size_t>(0));
}

namespace {

// Runs the real receiver against a scripted sender.
ErrorCode receiver_against(const std::function<void(Channel&, const ProtocolConfig&)>& script) {
  const SynthData d = small_data(10, 2, 3);
  const auto cfg = small_config();
  auto [cs, cr] = make_loopback_pair();
  auto receiver = std::async(std::launch::async, [&, ch = cr.get()] {
    return code_of([&] { run_receiver(d.b, cfg, *ch); });
  });
  try {
    script(*cs, cfg);
  } catch (const ProtocolError&) {
  }
  cs->close();
  return receiver.get();
}

}  // namespace

TEST(Session, InterruptedMidBatch) {
  const ErrorCode c = receiver_against([](Channel& ch, const ProtocolConfig& cfg) {
    ch.send({MessageType::kHandshake, make_handshake(cfg, 10).encode()});
    ch.expect(MessageType::kHandshake);
    Bytes first;
    put_u64_be(first, 60);  // announces 60 elements, sends 1
    first.resize(8 + kElementSize);
    ch.send({MessageType::kSigBatch, first});
  });
  EXPECT_EQ(c, ErrorCode::kConnectionLost);
}

TEST(Session, WrongBatchLengthIsMalformed) {
  const ErrorCode c = receiver_against([](Channel& ch, const ProtocolConfig& cfg) {
    ch.send({MessageType::kHandshake, make_handshake(cfg, 10).encode()});
    ch.expect(MessageType::kHandshake);
    const auto list = encrypt_own(std::vector<std::string>{"a", "b"}, keygen());
    send_batch(ch, MessageType::kSigBatch, list.flat(), kElementSize);
    ch.recv();
  });
  EXPECT_EQ(c, ErrorCode::kMalformedMessage);
}

TEST(Session, GarbageElementsAreMalformed) {
  const ErrorCode c = receiver_against([](Channel& ch, const ProtocolConfig& cfg) {
    ch.send({MessageType::kHandshake, make_handshake(cfg, 10).encode()});
    ch.expect(MessageType::kHandshake);
    send_batch(ch, MessageType::kSigBatch, Bytes(60 * kElementSize, 0), kElementSize);
    ch.recv();
  });
  EXPECT_EQ(c, ErrorCode::kMalformedMessage);
}

TEST(Session, OutOfOrderMessageIsUnexpected) {
  const ErrorCode c = receiver_against([](Channel& ch, const ProtocolConfig& cfg) {
    ch.send({MessageType::kHandshake, make_handshake(cfg, 10).encode()});
    ch.expect(MessageType::kHandshake);
    ch.send({MessageType::kDone, {}});
    ch.recv();
  });
  EXPECT_EQ(c, ErrorCode::kUnexpectedMessage);
}

TEST(Session, PeerAbortIsReported) {
  const ErrorCode c = receiver_against([](Channel& ch, const ProtocolConfig&) {
    ch.expect(MessageType::kHandshake);
    ch.abort(ErrorCode::kRefused, "changed my mind");
  });
  EXPECT_EQ(c, ErrorCode::kPeerAborted);
}

TEST(Session, RevealOfUnmatchedRecordIsRefused) {
  // A sender that follows the revealing flow but asks for a record it did
  // not match.
  const SynthData d = small_data(10, 0, 3);
  const auto cfg = small_config(Variant::kRevealing);
  auto [cs, cr] = make_loopback_pair();
  auto receiver = std::async(std::launch::async, [&, ch = cr.get()] {
    return code_of([&] { run_receiver(d.b, cfg, *ch); });
  });
  try {
    Channel& ch = *cs;
    ch.send({MessageType::kHandshake, make_handshake(cfg, 1).encode()});
    ch.expect(MessageType::kHandshake);
    const Scalar sk = keygen();
    // One record whose signatures are unlike anything in the receiver's data.
    std::vector<Digest256> sigs(6);
    for (size_t i = 0; i < sigs.size(); ++i) sigs[i] = sha256("unrelated" + std::to_string(i));
    send_batch(ch, MessageType::kSigBatch, encrypt_own(sigs, sk).flat(), kElementSize);
    recv_batch(ch, MessageType::kReencBatch, kElementSize);
    const auto peer_once = EncryptedList::from_flat(
        recv_batch(ch, MessageType::kReceiverSigs, kElementSize), Stage::kOnce);
    send_batch(ch, MessageType::kMutualReturn, reencrypt_peer(peer_once, sk).flat(),
               kElementSize);
    Bytes req;
    put_u32_be(req, 0);
    send_batch(ch, MessageType::kRevealRequest, req, 4);
    ch.recv();
  } catch (const ProtocolError&) {
  }
  EXPECT_EQ(receiver.get(), ErrorCode::kRefused);
}

TEST(Session, RecordsSharingTheirFirstBandAreRevealedSeparately) {
  // Two receiver records with the same first band signature must still be
  // told apart by reveal requests and exact Jaccard queries.
  using pprl::testing::distinct_chars;
  using pprl::testing::single_field_record;
  ProtocolConfig cfg;
  cfg.variant = Variant::kRevealing;
  cfg.exact_jaccard = true;
  cfg.linkage.groups = pprl::testing::single_field_spec(1);
  cfg.linkage.lsh = pprl::testing::params_with_seed(4, 1, 17);
  cfg.linkage.id_field = "id";
  const LshEngine engine(cfg.linkage.lsh, cfg.linkage.groups);
  auto band0 = [&](const Record& r) {
    return engine.signatures(preprocess(r, cfg.linkage.groups)).front();
  };
  const Record first = single_field_record("r0", distinct_chars(0, 20));
  Record second;
  for (size_t extra = 100;; ++extra) {
    second = single_field_record("r1", distinct_chars(0, 20) + distinct_chars(extra, 1));
    if (band0(second) == band0(first)) break;
  }
  Dataset data;
  data.records = {first, second};

  const LoopbackOutcome o = run_loopback(data, data, cfg);
  ASSERT_EQ(o.sender.pairs.size(), 4u);
  ASSERT_EQ(o.sender.revealed.size(), 4u);
  ASSERT_EQ(o.sender.exact.size(), 4u);
  for (size_t i = 0; i < 4; ++i) {
    const auto& p = o.sender.pairs[i];
    const size_t peer = o.receiver.block_records.at(p.peer_block);
    EXPECT_EQ(o.sender.revealed[i].fields, data.records[peer].fields);
    EXPECT_EQ(o.sender.exact[i].peer_size, peer == 0 ? 20u : 21u);
    EXPECT_EQ(o.sender.exact[i].intersection, p.local_index == 1 && peer == 1 ? 21u : 20u);
  }
}

TEST(Transcript, SenderBlocksDoNotDependOnRecordOrder) {
  // With the key pinned, the sender's SIG_BATCH for a dataset and for the
  // same dataset in reverse order hold the same blocks; only their order
  // (the sender's secret permutation) may differ.
  const SynthData d = small_data(30, 0, 12);
  auto cfg = small_config();
  cfg.fixed_entropy = Bytes{9, 9};
  auto capture = [&](const Dataset& data) {
    auto [cs, cr] = make_loopback_pair();
    auto sender = std::async(std::launch::async, [&, ch = cs.get()] {
      try {
        run_sender(data, cfg, *ch);
      } catch (const ProtocolError&) {
      }
    });
    Channel& ch = *cr;
    ch.send({MessageType::kHandshake, make_handshake(cfg, 30).encode()});
    ch.expect(MessageType::kHandshake);
    const EncryptedList l =
        EncryptedList::from_flat(recv_batch(ch, MessageType::kSigBatch, kElementSize),
                                 Stage::kOnce);
    ch.abort(ErrorCode::kRefused, "capture only");
    sender.get();
    std::vector<std::vector<ElementEncoding>> blocks;
    for (size_t b = 0; b < 30; ++b) {
      blocks.emplace_back(l.items.begin() + static_cast<long>(b * 6),
                          l.items.begin() + static_cast<long>((b + 1) * 6));
    }
    return blocks;
  };
  Dataset reversed = d.a;
  std::reverse(reversed.records.begin(), reversed.records.end());
  auto x = capture(d.a);
  auto y = capture(reversed);
  EXPECT_NE(x, y);
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  EXPECT_EQ(x, y);
}

TEST(Records, EncodeDecode) {
  std::vector<Record> rs(2);
  rs[0].fields = {{"a", "1"}, {"b", ""}};
  rs[1].fields = {{"name", "Zoë"}};
  const Bytes enc = encode_records(rs);
  EXPECT_EQ(decode_records(enc), rs);
  EXPECT_TRUE(decode_records(encode_records({})).empty());
  Bytes truncated(enc.begin(), enc.end() - 1);
  EXPECT_THROW(decode_records(truncated), ProtocolError);
  Bytes trailing = enc;
  trailing.push_back(0);
  EXPECT_THROW(decode_records(trailing), ProtocolError);
}
