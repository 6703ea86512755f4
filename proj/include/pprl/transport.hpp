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

#include <chrono>
#include <cstdint>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

#include "pprl/bytes.hpp"

namespace pprl {

enum class MessageType : uint8_t {
  kHandshake = 0x01,
  kSigBatch = 0x02,       // sender's once-encrypted signatures
  kReencBatch = 0x03,     // sender's signatures, re-encrypted by the receiver
  kReceiverSigs = 0x04,   // receiver's once-encrypted signatures
  kMutualReturn = 0x05,   // receiver's signatures, re-encrypted by the sender
  kRevealRequest = 0x06,  // receiver block numbers, 4 bytes big-endian each
  kRevealResponse = 0x07,
  kPsiCaRequest = 0x08,   // set id + initiator's once-encrypted shingles
  kPsiCaReenc = 0x09,     // initiator's shingles re-encrypted and shuffled
  kPsiCaPeer = 0x0a,      // responder's once-encrypted shingles
  kDone = 0x0b,
  kAbort = 0x7f,
};

bool is_registered(uint8_t code);
std::string to_string(MessageType t);

enum class ErrorCode : uint8_t {
  kDigestMismatch = 1,
  kVersionMismatch = 2,
  kVariantMismatch = 3,
  kMalformedMessage = 4,
  kUnexpectedMessage = 5,
  kConnectionLost = 6,
  kAuthenticationFailed = 7,
  kTimeout = 8,
  kPeerAborted = 9,
  kRefused = 10,
  kEmptyRecord = 11,
};

std::string to_string(ErrorCode code);

/// Any condition that ends a session. A session that throws this yields no
/// result.
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(ErrorCode code, const std::string& what)
      : std::runtime_error(to_string(code) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline constexpr size_t kFrameHeaderSize = 5;
inline constexpr size_t kDefaultMaxFrame = size_t{16} << 20;

struct Frame {
  MessageType type = MessageType::kDone;
  Bytes payload;
};

/// [1B type][4B big-endian length][payload]
Bytes encode_frame(const Frame& frame);

struct ChannelStats {
  uint64_t bytes_sent = 0;
  uint64_t bytes_received = 0;
  uint64_t frames_sent = 0;
  uint64_t frames_received = 0;
  double send_seconds = 0;  // wall time inside send()
  double recv_seconds = 0;  // wall time inside recv(), including waiting
  std::set<MessageType> types_sent;
  std::set<MessageType> types_received;

  double io_seconds() const { return send_seconds + recv_seconds; }
};

/// Ordered, reliable, full-duplex frame channel. One sending thread and one
/// receiving thread may use it concurrently.
class Channel {
 public:
  explicit Channel(size_t max_frame = kDefaultMaxFrame) : max_frame_(max_frame) {}
  virtual ~Channel() = default;
  Channel(const Channel&) = delete;
  Channel& operator=(const Channel&) = delete;

  void send(const Frame& frame);
  /// Throws ProtocolError(kPeerAborted) when the peer sent ABORT.
  Frame recv();
  /// recv() plus a type check (kUnexpectedMessage otherwise).
  Frame expect(MessageType type);
  /// Best-effort ABORT frame; never throws.
  void abort(ErrorCode code, const std::string& reason) noexcept;

  virtual void close() = 0;

  size_t max_frame() const { return max_frame_; }
  const ChannelStats& stats() const { return stats_; }

 protected:
  virtual void write_all(ByteView data) = 0;
  virtual void read_exact(std::span<uint8_t> out) = 0;

 private:
  size_t max_frame_;
  ChannelStats stats_;
};

/// Sends `flat` (a concatenation of fixed-size elements) as one logical
/// batch, chunked across frames of `type` so no frame exceeds the channel
/// limit. The first frame starts with an 8-byte element count.
void send_batch(Channel& ch, MessageType type, ByteView flat, size_t elem_size);
/// Reassembles a batch; throws kMalformedMessage if sizes do not line up.
Bytes recv_batch(Channel& ch, MessageType type, size_t elem_size);
/// Same, when the first frame of the batch was already read by the caller.
Bytes recv_batch(Channel& ch, Frame first, size_t elem_size);

/// Two in-process endpoints joined by byte pipes.
std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_loopback_pair(
    size_t max_frame = kDefaultMaxFrame);

inline constexpr uint16_t kProtocolVersion = 1;
inline constexpr size_t kHandshakeSize = 2 + 1 + 32 + 32 + 8;

/// version(2B) | variant(1B) | params-digest(32B) | spec-digest(32B) | N(8B)
struct Handshake {
  uint16_t version = kProtocolVersion;
  uint8_t variant = 0;
  Digest256 params_digest{};
  Digest256 spec_digest{};
  uint64_t n = 0;

  Bytes encode() const;
  static Handshake decode(ByteView payload);
  bool operator==(const Handshake&) const = default;
};

}  // namespace pprl
