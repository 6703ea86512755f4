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
#include <string>

#include "pprl/transport.hpp"

namespace pprl {

/// PEM files for mutually authenticated TLS 1.3. The CA file holds the
/// trust anchor(s) used to verify the peer's certificate.
struct TlsCredentials {
  std::string cert_file;
  std::string key_file;
  std::string ca_file;
};

/// Fills any field left empty from PPRL_TLS_CERT / PPRL_TLS_KEY /
/// PPRL_TLS_CA. When `override_set` is true the environment wins even over
/// values already present.
TlsCredentials credentials_from_env(TlsCredentials base, bool override_set = true);

using Timeout = std::chrono::milliseconds;
inline constexpr Timeout kDefaultIoTimeout{120'000};

/// Listening endpoint. Each accept() returns a channel whose peer presented
/// a certificate chaining to the configured CA.
class TlsListener {
 public:
  TlsListener(const std::string& host, uint16_t port, const TlsCredentials& creds);
  ~TlsListener();
  TlsListener(const TlsListener&) = delete;
  TlsListener& operator=(const TlsListener&) = delete;

  /// The bound port (useful when constructed with port 0).
  uint16_t port() const { return port_; }

  /// Throws ProtocolError: kTimeout when no client connects in time,
  /// kAuthenticationFailed when the TLS handshake or peer verification fails.
  std::unique_ptr<Channel> accept(Timeout accept_timeout = kDefaultIoTimeout,
                                  Timeout io_timeout = kDefaultIoTimeout);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  uint16_t port_ = 0;
};

std::unique_ptr<Channel> tls_connect(const std::string& host, uint16_t port,
                                     const TlsCredentials& creds,
                                     Timeout io_timeout = kDefaultIoTimeout);

/// Splits "host:port"; throws std::invalid_argument on bad input.
std::pair<std::string, uint16_t> parse_endpoint(const std::string& endpoint);

}  // namespace pprl
