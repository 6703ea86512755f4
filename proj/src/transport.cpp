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

#include "pprl/transport.hpp"

#include <algorithm>
#include <condition_variable>
#include <cstring>
#include <mutex>

namespace pprl {

bool is_registered(uint8_t code) {
  return (code >= 0x01 && code <= 0x0b) || code == 0x7f;
}

std::string to_string(MessageType t) {
  switch (t) {
    case MessageType::kHandshake: return "HANDSHAKE";
    case MessageType::kSigBatch: return "SIG_BATCH";
    case MessageType::kReencBatch: return "REENC_BATCH";
    case MessageType::kReceiverSigs: return "RECEIVER_SIGS";
    case MessageType::kMutualReturn: return "MUTUAL_RETURN";
    case MessageType::kRevealRequest: return "REVEAL_REQUEST";
    case MessageType::kRevealResponse: return "REVEAL_RESPONSE";
    case MessageType::kPsiCaRequest: return "PSI_CA_REQUEST";
    case MessageType::kPsiCaReenc: return "PSI_CA_REENC";
    case MessageType::kPsiCaPeer: return "PSI_CA_PEER";
    case MessageType::kDone: return "DONE";
    case MessageType::kAbort: return "ABORT";
  }
  return "UNKNOWN";
}

std::string to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDigestMismatch: return "digest mismatch";
    case ErrorCode::kVersionMismatch: return "version mismatch";
    case ErrorCode::kVariantMismatch: return "variant mismatch";
    case ErrorCode::kMalformedMessage: return "malformed message";
    case ErrorCode::kUnexpectedMessage: return "unexpected message";
    case ErrorCode::kConnectionLost: return "connection lost";
    case ErrorCode::kAuthenticationFailed: return "authentication failed";
    case ErrorCode::kTimeout: return "timeout";
    case ErrorCode::kPeerAborted: return "peer aborted";
    case ErrorCode::kRefused: return "request refused";
    case ErrorCode::kEmptyRecord: return "empty record";
  }
  return "unknown error";
}

Bytes encode_frame(const Frame& frame) {
  Bytes out;
  out.reserve(kFrameHeaderSize + frame.payload.size());
  out.push_back(static_cast<uint8_t>(frame.type));
  put_u32_be(out, static_cast<uint32_t>(frame.payload.size()));
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  return out;
}

namespace {

class IoTimer {
 public:
  explicit IoTimer(double& sink) : sink_(sink), start_(std::chrono::steady_clock::now()) {}
  ~IoTimer() {
    sink_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  double& sink_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

void Channel::send(const Frame& frame) {
  if (frame.payload.size() > max_frame_) {
    throw std::invalid_argument("frame payload exceeds the channel limit");
  }
  IoTimer timer(stats_.send_seconds);
  Bytes header;
  header.push_back(static_cast<uint8_t>(frame.type));
  put_u32_be(header, static_cast<uint32_t>(frame.payload.size()));
  write_all(header);
  if (!frame.payload.empty()) write_all(frame.payload);
  stats_.bytes_sent += kFrameHeaderSize + frame.payload.size();
  stats_.frames_sent += 1;
  stats_.types_sent.insert(frame.type);
}

Frame Channel::recv() {
  Frame frame;
  {
    IoTimer timer(stats_.recv_seconds);
    std::array<uint8_t, kFrameHeaderSize> header{};
    read_exact(header);
    if (!is_registered(header[0])) {
      throw ProtocolError(ErrorCode::kMalformedMessage,
                          "unregistered message code " + std::to_string(header[0]));
    }
    const uint32_t len = get_u32_be(header.data() + 1);
    if (len > max_frame_) {
      throw ProtocolError(ErrorCode::kMalformedMessage, "frame exceeds the size limit");
    }
    frame.type = static_cast<MessageType>(header[0]);
    frame.payload.resize(len);
    if (len) read_exact(frame.payload);
    stats_.bytes_received += kFrameHeaderSize + len;
    stats_.frames_received += 1;
    stats_.types_received.insert(frame.type);
  }
  if (frame.type == MessageType::kAbort) {
    std::string reason(frame.payload.begin() + std::min<size_t>(1, frame.payload.size()),
                       frame.payload.end());
    throw ProtocolError(ErrorCode::kPeerAborted, reason);
  }
  return frame;
}

Frame Channel::expect(MessageType type) {
  Frame f = recv();
  if (f.type != type) {
    throw ProtocolError(ErrorCode::kUnexpectedMessage,
                        "expected " + to_string(type) + ", got " + to_string(f.type));
  }
  return f;
}

void Channel::abort(ErrorCode code, const std::string& reason) noexcept {
  try {
    Frame f{MessageType::kAbort, {}};
    f.payload.push_back(static_cast<uint8_t>(code));
    f.payload.insert(f.payload.end(), reason.begin(), reason.end());
    if (f.payload.size() > max_frame_) f.payload.resize(max_frame_);
    send(f);
  } catch (...) {
  }
}

void send_batch(Channel& ch, MessageType type, ByteView flat, size_t elem_size) {
  if (elem_size == 0 || flat.size() % elem_size != 0) {
    throw std::invalid_argument("batch is not a whole number of elements");
  }
  const uint64_t count = flat.size() / elem_size;
  const size_t per_frame = std::max<size_t>(1, (ch.max_frame() - 8) / elem_size);
  size_t offset = 0;
  bool first = true;
  while (first || offset < count) {
    const size_t n = std::min<size_t>(per_frame, count - offset);
    Frame f{type, {}};
    f.payload.reserve((first ? 8 : 0) + n * elem_size);
    if (first) put_u64_be(f.payload, count);
    f.payload.insert(f.payload.end(), flat.begin() + offset * elem_size,
                     flat.begin() + (offset + n) * elem_size);
    ch.send(f);
    offset += n;
    first = false;
  }
}

Bytes recv_batch(Channel& ch, MessageType type, size_t elem_size) {
  return recv_batch(ch, ch.expect(type), elem_size);
}

Bytes recv_batch(Channel& ch, Frame f, size_t elem_size) {
  const MessageType type = f.type;
  if (f.payload.size() < 8) {
    throw ProtocolError(ErrorCode::kMalformedMessage, "batch header truncated");
  }
  const uint64_t count = get_u64_be(f.payload.data());
  if (count > (uint64_t{1} << 40) / elem_size) {
    throw ProtocolError(ErrorCode::kMalformedMessage, "batch count out of range");
  }
  const size_t total = static_cast<size_t>(count) * elem_size;
  Bytes out;
  out.reserve(total);
  auto append = [&](const uint8_t* data, size_t n) {
    if (n % elem_size != 0) {
      throw ProtocolError(ErrorCode::kMalformedMessage,
                          "batch payload is not a multiple of the element size");
    }
    if (out.size() + n > total) {
      throw ProtocolError(ErrorCode::kMalformedMessage, "batch longer than announced");
    }
    out.insert(out.end(), data, data + n);
  };
  append(f.payload.data() + 8, f.payload.size() - 8);
  while (out.size() < total) {
    Frame next = ch.expect(type);
    if (next.payload.empty()) {
      throw ProtocolError(ErrorCode::kMalformedMessage, "empty continuation frame");
    }
    append(next.payload.data(), next.payload.size());
  }
  return out;
}

namespace {

struct Pipe {
  std::mutex mu;
  std::condition_variable cv;
  Bytes buf;
  size_t head = 0;
  bool closed = false;
};

class LoopbackChannel final : public Channel {
 public:
  LoopbackChannel(std::shared_ptr<Pipe> out, std::shared_ptr<Pipe> in, size_t max_frame)
      : Channel(max_frame), out_(std::move(out)), in_(std::move(in)) {}
  ~LoopbackChannel() override { close(); }

  void close() override {
    for (auto* p : {out_.get(), in_.get()}) {
      std::lock_guard lock(p->mu);
      p->closed = true;
      p->cv.notify_all();
    }
  }

 protected:
  void write_all(ByteView data) override {
    std::lock_guard lock(out_->mu);
    if (out_->closed) throw ProtocolError(ErrorCode::kConnectionLost, "loopback closed");
    out_->buf.insert(out_->buf.end(), data.begin(), data.end());
    out_->cv.notify_all();
  }

  void read_exact(std::span<uint8_t> out) override {
    size_t done = 0;
    std::unique_lock lock(in_->mu);
    while (done < out.size()) {
      in_->cv.wait(lock, [&] { return in_->head < in_->buf.size() || in_->closed; });
      const size_t avail = in_->buf.size() - in_->head;
      if (avail == 0) throw ProtocolError(ErrorCode::kConnectionLost, "loopback closed");
      const size_t n = std::min(avail, out.size() - done);
      std::memcpy(out.data() + done, in_->buf.data() + in_->head, n);
      in_->head += n;
      done += n;
      if (in_->head == in_->buf.size()) {
        in_->buf.clear();
        in_->head = 0;
      } else if (in_->head > (size_t{1} << 24)) {
        in_->buf.erase(in_->buf.begin(), in_->buf.begin() + static_cast<long>(in_->head));
        in_->head = 0;
      }
    }
  }

 private:
  std::shared_ptr<Pipe> out_;
  std::shared_ptr<Pipe> in_;
};

}  // namespace

std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_loopback_pair(
    size_t max_frame) {
  auto a_to_b = std::make_shared<Pipe>();
  auto b_to_a = std::make_shared<Pipe>();
  return {std::make_unique<LoopbackChannel>(a_to_b, b_to_a, max_frame),
          std::make_unique<LoopbackChannel>(b_to_a, a_to_b, max_frame)};
}

Bytes Handshake::encode() const {
  Bytes out;
  out.reserve(kHandshakeSize);
  put_u16_be(out, version);
  out.push_back(variant);
  out.insert(out.end(), params_digest.begin(), params_digest.end());
  out.insert(out.end(), spec_digest.begin(), spec_digest.end());
  put_u64_be(out, n);
  return out;
}

Handshake Handshake::decode(ByteView payload) {
  if (payload.size() != kHandshakeSize) {
    throw ProtocolError(ErrorCode::kMalformedMessage, "handshake has wrong length");
  }
  Handshake h;
  h.version = get_u16_be(payload.data());
  h.variant = payload[2];
  std::copy_n(payload.begin() + 3, 32, h.params_digest.begin());
  std::copy_n(payload.begin() + 35, 32, h.spec_digest.begin());
  h.n = get_u64_be(payload.data() + 67);
  return h;
}

}  // namespace pprl
