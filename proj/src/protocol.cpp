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

#include "pprl/protocol.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <thread>
#include <tuple>
#include <unordered_map>

#include "pprl/parallel.hpp"
#include "pprl/psi.hpp"

namespace pprl {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kBase: return "base";
    case Variant::kMutual: return "mutual";
    case Variant::kCount: return "count";
    case Variant::kRevealing: return "revealing";
  }
  return "unknown";
}

Variant parse_variant(const std::string& name) {
  if (name == "base") return Variant::kBase;
  if (name == "mutual") return Variant::kMutual;
  if (name == "count") return Variant::kCount;
  if (name == "revealing") return Variant::kRevealing;
  throw std::invalid_argument("unknown variant '" + name + "'");
}

PreparedDataset prepare(const Dataset& raw, const std::vector<FieldGroupSpec>& specs) {
  PreparedDataset out;
  std::set<std::string> seen;
  for (size_t i = 0; i < raw.records.size(); ++i) {
    if (!seen.insert(dedup_key(raw.records[i], specs)).second) continue;
    out.records.records.push_back(preprocess(raw.records[i], specs));
    out.source.push_back(i);
  }
  return out;
}

std::vector<BandSignature> build_signature_array(const Dataset& preprocessed,
                                                 const LshEngine& engine,
                                                 const std::vector<size_t>& pi) {
  if (pi.size() != preprocessed.size()) {
    throw std::invalid_argument("permutation does not cover the dataset");
  }
  const size_t bands = engine.params().bands;
  std::vector<BandSignature> out(bands * pi.size());
  parallel_for(pi.size(), [&](size_t i) {
    BandSignatureList sigs = engine.signatures(preprocessed.records[pi[i]]);
    std::copy(sigs.begin(), sigs.end(), out.begin() + static_cast<std::ptrdiff_t>(i * bands));
  }, 16);
  return out;
}

Handshake make_handshake(const ProtocolConfig& cfg, uint64_t n) {
  Handshake h;
  h.variant = static_cast<uint8_t>(cfg.variant);
  h.params_digest = cfg.linkage.params_digest();
  h.spec_digest = cfg.linkage.spec_digest();
  h.n = n;
  return h;
}

void verify_handshake(const Handshake& mine, const Handshake& theirs) {
  if (mine.version != theirs.version) {
    throw ProtocolError(ErrorCode::kVersionMismatch,
                        "local " + std::to_string(mine.version) + ", peer " +
                            std::to_string(theirs.version));
  }
  if (mine.variant != theirs.variant) {
    throw ProtocolError(ErrorCode::kVariantMismatch,
                        "local " + std::to_string(mine.variant) + ", peer " +
                            std::to_string(theirs.variant));
  }
  if (mine.params_digest != theirs.params_digest) {
    throw ProtocolError(ErrorCode::kDigestMismatch, "LSH parameters differ");
  }
  if (mine.spec_digest != theirs.spec_digest) {
    throw ProtocolError(ErrorCode::kDigestMismatch, "field group specs differ");
  }
}

size_t count_matches(const std::vector<uint8_t>& m, size_t bands) {
  if (bands == 0 || m.size() % bands != 0) {
    throw std::invalid_argument("match bitmap length is not a multiple of B");
  }
  size_t count = 0;
  for (size_t b = 0; b < m.size(); b += bands) {
    if (std::any_of(m.begin() + static_cast<std::ptrdiff_t>(b),
                    m.begin() + static_cast<std::ptrdiff_t>(b + bands),
                    [](uint8_t x) { return x != 0; })) {
      ++count;
    }
  }
  return count;
}

Bytes encode_records(const std::vector<Record>& records) {
  Bytes out;
  auto put_str = [&](const std::string& s) {
    put_u32_be(out, static_cast<uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
  };
  put_u32_be(out, static_cast<uint32_t>(records.size()));
  for (const auto& r : records) {
    put_u32_be(out, static_cast<uint32_t>(r.fields.size()));
    for (const auto& [name, value] : r.fields) {
      put_str(name);
      put_str(value);
    }
  }
  return out;
}

std::vector<Record> decode_records(ByteView payload) {
  size_t pos = 0;
  auto need = [&](size_t n) {
    if (payload.size() - pos < n) {
      throw ProtocolError(ErrorCode::kMalformedMessage, "record payload truncated");
    }
  };
  auto get_u32 = [&] {
    need(4);
    uint32_t v = get_u32_be(payload.data() + pos);
    pos += 4;
    return v;
  };
  auto get_str = [&] {
    const uint32_t n = get_u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(payload.data() + pos), n);
    pos += n;
    return s;
  };
  const uint32_t count = get_u32();
  std::vector<Record> out;
  for (uint32_t i = 0; i < count; ++i) {
    Record r;
    const uint32_t nf = get_u32();
    for (uint32_t f = 0; f < nf; ++f) {
      std::string name = get_str();
      r.fields[name] = get_str();
    }
    out.push_back(std::move(r));
  }
  if (pos != payload.size()) {
    throw ProtocolError(ErrorCode::kMalformedMessage, "trailing bytes after records");
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

/// Randomness for one session: the OS CSPRNG, or a seeded generator when
/// the config pins the entropy.
class SessionRng {
 public:
  SessionRng(const ProtocolConfig& cfg, Role role) {
    if (cfg.fixed_entropy) {
      Bytes label(cfg.fixed_entropy->begin(), cfg.fixed_entropy->end());
      label.push_back(role == Role::kSender ? 's' : 'r');
      const Digest256 d = sha256(label);
      seeded_.emplace(get_u64_be(d.data()));
      key_entropy_ = Bytes(d.begin(), d.end());
    }
  }

  Scalar key() { return seeded_ ? keygen_from_entropy(key_entropy_) : keygen(); }

  std::vector<size_t> permutation(size_t n) {
    std::vector<size_t> pi(n);
    std::iota(pi.begin(), pi.end(), size_t{0});
    if (seeded_) {
      std::shuffle(pi.begin(), pi.end(), *seeded_);
    } else {
      std::shuffle(pi.begin(), pi.end(), secure_);
    }
    return pi;
  }

  BlockPermutation block_permutation(size_t n_blocks, size_t block_size) {
    if (seeded_) return BlockPermutation::random(n_blocks, block_size, *seeded_);
    return BlockPermutation::random(n_blocks, block_size, secure_);
  }

 private:
  std::optional<std::mt19937_64> seeded_;
  Bytes key_entropy_;
  SecureRng secure_;
};

/// Session state shared by both roles.
struct Session {
  Role role;
  const ProtocolConfig& cfg;
  Channel& ch;
  const Dataset* raw = nullptr;
  PreparedDataset data;
  std::vector<size_t> pi;  // block -> index into data.records
  Scalar sk;
  uint32_t bands = 0;
  uint64_t n_peer = 0;
  EncryptedList own_once;  // L' of this party

  Session(Role r, const ProtocolConfig& c, Channel& channel) : role(r), cfg(c), ch(channel) {}

  size_t input_index(size_t block) const { return data.source[pi[block]]; }

  const Record& record_at_block(size_t block) const { return data.records.records[pi[block]]; }

  EncryptedList receive_list(MessageType type, uint64_t n_records, Stage stage) {
    EncryptedList list = EncryptedList::from_flat(recv_batch(ch, type, kElementSize), stage);
    if (list.size() != n_records * bands) {
      throw ProtocolError(ErrorCode::kMalformedMessage,
                          to_string(type) + " carries " + std::to_string(list.size()) +
                              " elements, expected " + std::to_string(n_records * bands));
    }
    return list;
  }

  EncryptedList reencrypt(const EncryptedList& peer, const BlockPermutation* perm = nullptr) {
    try {
      return reencrypt_peer(peer, sk, perm);
    } catch (const MalformedElementError& e) {
      throw ProtocolError(ErrorCode::kMalformedMessage, e.what());
    }
  }
};

/// Pairs (own block, peer block) with the number of positionally equal
/// bands. `own` and `peer` are twice-encrypted and in their owners' block
/// order.
std::map<std::pair<uint32_t, uint32_t>, uint32_t> band_hits(const EncryptedList& own,
                                                            const EncryptedList& peer,
                                                            uint32_t bands) {
  ElementIndex index(peer);
  std::map<std::pair<uint32_t, uint32_t>, uint32_t> hits;
  for (size_t p = 0; p < own.size(); ++p) {
    for (uint32_t q : index.positions(own.items[p])) {
      if (q % bands != p % bands) continue;
      hits[{static_cast<uint32_t>(p / bands), q / bands}] += 1;
    }
  }
  return hits;
}

std::vector<MatchPair> to_pairs(const Session& s,
                                const std::map<std::pair<uint32_t, uint32_t>, uint32_t>& hits) {
  std::vector<MatchPair> pairs;
  pairs.reserve(hits.size());
  for (const auto& [key, h] : hits) {
    MatchPair p;
    p.local_index = s.input_index(key.first);
    p.local_id = s.record_at_block(key.first).id;
    p.peer_block = key.second;
    p.hits = h;
    pairs.push_back(std::move(p));
  }
  std::sort(pairs.begin(), pairs.end(), [](const MatchPair& a, const MatchPair& b) {
    return std::tie(a.local_index, a.peer_block) < std::tie(b.local_index, b.peer_block);
  });
  return pairs;
}

void prepare_session(Session& s, const Dataset& raw, SessionRng& rng) {
  const auto& lk = s.cfg.linkage;
  validate(lk.lsh);
  validate_specs(lk.groups);
  s.bands = lk.lsh.bands;
  s.data = prepare(raw, lk.groups);
  s.pi = rng.permutation(s.data.records.size());
  s.sk = rng.key();
  if (s.cfg.on_session_key) s.cfg.on_session_key(s.sk);
}

void exchange_handshake(Session& s) {
  const Handshake mine = make_handshake(s.cfg, s.data.records.size());
  s.ch.send({MessageType::kHandshake, mine.encode()});
  const Handshake theirs = Handshake::decode(s.ch.expect(MessageType::kHandshake).payload);
  verify_handshake(mine, theirs);
  s.n_peer = theirs.n;
}

void compute_own_list(Session& s) {
  LshEngine engine(s.cfg.linkage.lsh, s.cfg.linkage.groups);
  std::vector<BandSignature> sigs;
  try {
    sigs = build_signature_array(s.data.records, engine, s.pi);
  } catch (const EmptyRecordError& e) {
    throw ProtocolError(ErrorCode::kEmptyRecord, e.what());
  }
  s.own_once = encrypt_own(sigs, s.sk);
}

MatchResult sender_body(Session& s) {
  MatchResult res;
  compute_own_list(s);
  send_batch(s.ch, MessageType::kSigBatch, s.own_once.flat(), kElementSize);

  const EncryptedList own_twice =
      s.receive_list(MessageType::kReencBatch, s.data.records.size(), Stage::kTwice);
  const EncryptedList peer_once =
      s.receive_list(MessageType::kReceiverSigs, s.n_peer, Stage::kOnce);
  const EncryptedList peer_twice = s.reencrypt(peer_once);

  if (s.cfg.variant == Variant::kCount) {
    res.match_count = count_matches(intersect(own_twice, peer_twice), s.bands);
  } else {
    res.pairs = to_pairs(s, band_hits(own_twice, peer_twice, s.bands));
  }

  if (s.cfg.variant == Variant::kMutual || s.cfg.variant == Variant::kRevealing) {
    send_batch(s.ch, MessageType::kMutualReturn, peer_twice.flat(), kElementSize);
  }

  if (s.cfg.variant == Variant::kRevealing) {
    Bytes blocks;
    for (const auto& p : res.pairs) put_u32_be(blocks, p.peer_block);
    send_batch(s.ch, MessageType::kRevealRequest, blocks, 4);
    const Frame reply = s.ch.expect(MessageType::kRevealResponse);
    res.revealed = decode_records(reply.payload);
    if (res.revealed.size() != res.pairs.size()) {
      throw ProtocolError(ErrorCode::kMalformedMessage,
                          "reveal response does not answer every request");
    }
  }

  if (s.cfg.exact_jaccard && s.cfg.variant != Variant::kCount) {
    std::unordered_map<size_t, size_t> block_of;
    for (size_t b = 0; b < s.pi.size(); ++b) block_of[s.input_index(b)] = b;
    std::unordered_map<size_t, std::unordered_set<std::string>> cache;
    for (size_t i = 0; i < res.pairs.size(); ++i) {
      const auto& p = res.pairs[i];
      auto it = cache.find(p.local_index);
      if (it == cache.end()) {
        it = cache
                 .emplace(p.local_index,
                          record_shingle_set(s.record_at_block(block_of.at(p.local_index)),
                                             s.cfg.linkage.groups))
                 .first;
      }
      const Cardinality c =
          psi_cardinality_initiate(s.ch, p.peer_block, it->second, s.sk);
      res.exact.push_back({i, c.intersection, c.local_size, c.peer_size});
    }
  }

  s.ch.send({MessageType::kDone, {}});
  return res;
}

MatchResult receiver_body(Session& s, SessionRng& rng) {
  MatchResult res;
  compute_own_list(s);
  const EncryptedList peer_once =
      s.receive_list(MessageType::kSigBatch, s.n_peer, Stage::kOnce);

  std::optional<BlockPermutation> perm;
  if (s.cfg.variant == Variant::kCount) perm = rng.block_permutation(s.n_peer, s.bands);
  const EncryptedList peer_twice = s.reencrypt(peer_once, perm ? &*perm : nullptr);
  send_batch(s.ch, MessageType::kReencBatch, peer_twice.flat(), kElementSize);
  send_batch(s.ch, MessageType::kReceiverSigs, s.own_once.flat(), kElementSize);

  std::set<uint32_t> matched_blocks;
  const bool returned =
      s.cfg.variant == Variant::kMutual || s.cfg.variant == Variant::kRevealing;
  if (returned) {
    const EncryptedList own_twice =
        s.receive_list(MessageType::kMutualReturn, s.data.records.size(), Stage::kTwice);
    const auto hits = band_hits(own_twice, peer_twice, s.bands);
    for (const auto& [key, h] : hits) matched_blocks.insert(key.first);
    if (s.cfg.variant == Variant::kMutual) res.pairs = to_pairs(s, hits);
  }

  std::unordered_map<uint32_t, std::unordered_set<std::string>> shingle_cache;
  const SetLookup lookup = [&](uint32_t block) -> const std::unordered_set<std::string>* {
    if (block >= s.data.records.size()) return nullptr;
    if (returned && !matched_blocks.count(block)) return nullptr;
    auto c = shingle_cache.find(block);
    if (c == shingle_cache.end()) {
      c = shingle_cache
              .emplace(block, record_shingle_set(s.record_at_block(block), s.cfg.linkage.groups))
              .first;
    }
    return &c->second;
  };

  bool revealed = false;
  for (;;) {
    Frame f = s.ch.recv();
    if (f.type == MessageType::kDone) break;
    if (f.type == MessageType::kPsiCaRequest) {
      psi_cardinality_respond(s.ch, std::move(f), lookup, s.sk);
      continue;
    }
    if (f.type == MessageType::kRevealRequest && s.cfg.variant == Variant::kRevealing &&
        !revealed) {
      const Bytes req = recv_batch(s.ch, std::move(f), 4);
      std::vector<Record> out;
      for (size_t off = 0; off < req.size(); off += 4) {
        const uint32_t block = get_u32_be(req.data() + off);
        if (!matched_blocks.count(block)) {
          throw ProtocolError(ErrorCode::kRefused, "reveal request for an unmatched record");
        }
        const size_t idx = s.input_index(block);
        res.disclosed.push_back(idx);
        out.push_back(Record{"", s.raw->records[idx].fields});
      }
      s.ch.send({MessageType::kRevealResponse, encode_records(out)});
      revealed = true;
      continue;
    }
    throw ProtocolError(ErrorCode::kUnexpectedMessage, "receiver got " + to_string(f.type));
  }
  return res;
}

}  // namespace

MatchResult run_party(Role role, const Dataset& raw, const ProtocolConfig& cfg, Channel& ch) {
  const auto start = Clock::now();
  const ChannelStats before = ch.stats();
  Session s(role, cfg, ch);
  s.raw = &raw;
  SessionRng rng(cfg, role);
  MatchResult res;
  try {
    prepare_session(s, raw, rng);
    exchange_handshake(s);
    res = role == Role::kSender ? sender_body(s) : receiver_body(s, rng);
  } catch (const ProtocolError& e) {
    if (e.code() != ErrorCode::kPeerAborted && e.code() != ErrorCode::kConnectionLost) {
      ch.abort(e.code(), e.what());
    }
    throw;
  } catch (const MalformedElementError& e) {
    ch.abort(ErrorCode::kMalformedMessage, e.what());
    throw ProtocolError(ErrorCode::kMalformedMessage, e.what());
  } catch (const std::exception& e) {
    ch.abort(ErrorCode::kRefused, e.what());
    throw;
  }

  res.n_local = s.data.records.size();
  res.n_peer = s.n_peer;
  res.block_records.resize(s.pi.size());
  for (size_t b = 0; b < s.pi.size(); ++b) res.block_records[b] = s.input_index(b);

  const ChannelStats& after = ch.stats();
  res.stats.bytes_sent = after.bytes_sent - before.bytes_sent;
  res.stats.bytes_received = after.bytes_received - before.bytes_received;
  res.stats.total_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  res.stats.comm_seconds = after.io_seconds() - before.io_seconds();
  res.stats.offline_seconds = std::max(0.0, res.stats.total_seconds - res.stats.comm_seconds);
  return res;
}

MatchResult run_sender(const Dataset& raw, const ProtocolConfig& cfg, Channel& ch) {
  return run_party(Role::kSender, raw, cfg, ch);
}

MatchResult run_receiver(const Dataset& raw, const ProtocolConfig& cfg, Channel& ch) {
  return run_party(Role::kReceiver, raw, cfg, ch);
}

LoopbackOutcome run_loopback(const Dataset& sender_data, const Dataset& receiver_data,
                             const ProtocolConfig& cfg, const ProtocolConfig* receiver_cfg) {
  auto [a, b] = make_loopback_pair();
  LoopbackOutcome out;
  std::exception_ptr receiver_error;
  std::thread peer([&, ch = b.get()] {
    try {
      out.receiver = run_receiver(receiver_data, receiver_cfg ? *receiver_cfg : cfg, *ch);
    } catch (...) {
      receiver_error = std::current_exception();
      ch->close();
    }
  });
  std::exception_ptr sender_error;
  try {
    out.sender = run_sender(sender_data, cfg, *a);
  } catch (...) {
    sender_error = std::current_exception();
    a->close();
  }
  peer.join();
  // Report the original failure rather than the peer's echo of it.
  auto is_echo = [](const std::exception_ptr& e) {
    try {
      std::rethrow_exception(e);
    } catch (const ProtocolError& pe) {
      return pe.code() == ErrorCode::kPeerAborted || pe.code() == ErrorCode::kConnectionLost;
    } catch (...) {
      return false;
    }
  };
  if (sender_error && receiver_error && is_echo(sender_error)) {
    std::rethrow_exception(receiver_error);
  }
  if (sender_error) std::rethrow_exception(sender_error);
  if (receiver_error) std::rethrow_exception(receiver_error);
  return out;
}

}  // namespace pprl
