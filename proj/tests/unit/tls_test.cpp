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

#include "pprl/protocol.hpp"
#include "pprl/synth.hpp"
#include "pprl/tls.hpp"
#include "test_pki.hpp"

using namespace pprl;
using pprl::testing::TestPki;

namespace {

constexpr Timeout kShort{5000};

struct Fixture {
  TestPki pki;
  TestPki::Authority ca = pki.make_ca("trusted");
  TestPki::Authority rogue = pki.make_ca("rogue");
  TlsCredentials server = pki.make_leaf("server", ca, ca);
  TlsCredentials client = pki.make_leaf("client", ca, ca);
};

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ProtocolError& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a ProtocolError";
  return ErrorCode::kRefused;
}

}  // namespace

TEST(Tls, FramesFlowBothWays) {
  Fixture s;
  TlsListener listener("127.0.0.1", 0, s.server);
  auto server = std::async(std::launch::async, [&] {
    auto ch = listener.accept(kShort, kShort);
    Frame f = ch->recv();
    ch->send({MessageType::kDone, f.payload});
    return f.payload;
  });
  auto ch = tls_connect("127.0.0.1", listener.port(), s.client, kShort);
  const Bytes payload(100000, 0x5a);
  ch->send({MessageType::kHandshake, payload});
  const Frame back = ch->expect(MessageType::kDone);
  EXPECT_EQ(back.payload, payload);
  EXPECT_EQ(server.get(), payload);
}

TEST(Tls, ClientWithForeignCertificateIsRejected) {
  Fixture s;
  const TlsCredentials intruder = s.pki.make_leaf("intruder", s.rogue, s.ca);
  TlsListener listener("127.0.0.1", 0, s.server);
  auto server = std::async(std::launch::async, [&] {
    return code_of([&] {
      auto ch = listener.accept(kShort, kShort);
      ch->recv();
    });
  });
  const ErrorCode client_code = code_of([&] {
    auto ch = tls_connect("127.0.0.1", listener.port(), intruder, kShort);
    ch->send({MessageType::kHandshake, Bytes(8)});
    ch->recv();
  });
  EXPECT_EQ(server.get(), ErrorCode::kAuthenticationFailed);
  EXPECT_TRUE(client_code == ErrorCode::kAuthenticationFailed ||
              client_code == ErrorCode::kConnectionLost)
      << to_string(client_code);
}

TEST(Tls, ServerWithForeignCertificateIsRejected) {
  Fixture s;
  const TlsCredentials impostor = s.pki.make_leaf("impostor", s.rogue, s.ca);
  TlsListener listener("127.0.0.1", 0, impostor);
  auto server = std::async(std::launch::async, [&] {
    try {
      auto ch = listener.accept(kShort, kShort);
      ch->recv();
    } catch (const ProtocolError&) {
    }
  });
  EXPECT_EQ(code_of([&] { tls_connect("127.0.0.1", listener.port(), s.client, kShort); }),
            ErrorCode::kAuthenticationFailed);
  server.get();
}

TEST(Tls, AcceptTimesOut) {
  Fixture s;
  TlsListener listener("127.0.0.1", 0, s.server);
  EXPECT_EQ(code_of([&] { listener.accept(Timeout{200}, kShort); }), ErrorCode::kTimeout);
}

TEST(Tls, MissingCredentialFilesThrow) {
  TlsCredentials none{"/nonexistent/cert.pem", "/nonexistent/key.pem", "/nonexistent/ca.pem"};
  EXPECT_ANY_THROW(TlsListener("127.0.0.1", 0, none));
}

TEST(Tls, ProtocolSessionOverTls) {
  Fixture s;
  SynthOptions opts;
  opts.n = 30;
  opts.planted = 5;
  opts.seed = 3;
  const SynthData data = generate_synthetic(opts);
  ProtocolConfig cfg;
  cfg.linkage = synthetic_config(3);
  cfg.linkage.lsh.bands = 8;
  cfg.linkage.lsh.rows = 3;
  TlsListener listener("127.0.0.1", 0, s.server);
  auto receiver = std::async(std::launch::async, [&] {
    auto ch = listener.accept(kShort, kShort);
    return run_receiver(data.b, cfg, *ch);
  });
  auto ch = tls_connect("127.0.0.1", listener.port(), s.client, kShort);
  const MatchResult sent = run_sender(data.a, cfg, *ch);
  const MatchResult got = receiver.get();
  EXPECT_EQ(got.n_peer, data.a.size());
  EXPECT_EQ(sent.n_peer, data.b.size());
  EXPECT_GE(sent.matched_records(), 5u);
  EXPECT_GT(sent.stats.bytes_sent, 0u);
}

TEST(Endpoint, Parsing) {
  EXPECT_EQ(parse_endpoint("localhost:9000"), (std::pair<std::string, uint16_t>{"localhost", 9000}));
  EXPECT_EQ(parse_endpoint("[::1]:443"), (std::pair<std::string, uint16_t>{"::1", 443}));
  EXPECT_THROW(parse_endpoint("nohost"), std::invalid_argument);
  EXPECT_THROW(parse_endpoint("h:70000"), std::invalid_argument);
  EXPECT_THROW(parse_endpoint("h:"), std::invalid_argument);
}

TEST(Endpoint, CredentialsFromEnvironment) {
  ::setenv("PPRL_TLS_CERT", "/env/cert", 1);
  ::unsetenv("PPRL_TLS_KEY");
  ::unsetenv("PPRL_TLS_CA");
  const TlsCredentials c = credentials_from_env({"/given/cert", "/given/key", ""}, false);
  EXPECT_EQ(c.cert_file, "/given/cert");
  EXPECT_EQ(c.key_file, "/given/key");
  const TlsCredentials o = credentials_from_env({"/given/cert", "/given/key", ""}, true);
  EXPECT_EQ(o.cert_file, "/env/cert");
  EXPECT_EQ(o.key_file, "/given/key");
  ::unsetenv("PPRL_TLS_CERT");
}
