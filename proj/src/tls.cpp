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

#include "pprl/tls.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <openssl/err.h>
#include <openssl/ssl.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>

namespace pprl {

namespace {

struct CtxDeleter {
  void operator()(SSL_CTX* c) const { SSL_CTX_free(c); }
};
using CtxPtr = std::unique_ptr<SSL_CTX, CtxDeleter>;

std::string openssl_errors() {
  std::string out;
  while (unsigned long e = ERR_get_error()) {
    char buf[256];
    ERR_error_string_n(e, buf, sizeof(buf));
    if (!out.empty()) out += "; ";
    out += buf;
  }
  return out.empty() ? "unknown TLS error" : out;
}

bool is_auth_failure(unsigned long err) {
  if (ERR_GET_LIB(err) != ERR_LIB_SSL) return false;
  switch (ERR_GET_REASON(err)) {
    case SSL_R_CERTIFICATE_VERIFY_FAILED:
    case SSL_R_TLSV1_ALERT_UNKNOWN_CA:
    case SSL_R_SSLV3_ALERT_BAD_CERTIFICATE:
    case SSL_R_SSLV3_ALERT_CERTIFICATE_UNKNOWN:
    case SSL_R_TLSV13_ALERT_CERTIFICATE_REQUIRED:
    case SSL_R_PEER_DID_NOT_RETURN_A_CERTIFICATE:
    case SSL_R_TLSV1_ALERT_DECRYPT_ERROR:
    case SSL_R_TLSV1_ALERT_ACCESS_DENIED:
    case SSL_R_SSLV3_ALERT_HANDSHAKE_FAILURE:
      return true;
    default:
      return false;
  }
}

[[noreturn]] void throw_ssl_failure(const char* stage, bool handshake) {
  const unsigned long first = ERR_peek_error();
  const bool timed_out = errno == EAGAIN || errno == EWOULDBLOCK;
  std::string detail = std::string(stage) + ": " + openssl_errors();
  if (is_auth_failure(first) || (handshake && first != 0)) {
    throw ProtocolError(ErrorCode::kAuthenticationFailed, detail);
  }
  if (timed_out) throw ProtocolError(ErrorCode::kTimeout, stage);
  throw ProtocolError(ErrorCode::kConnectionLost, detail);
}

void ignore_sigpipe() {
  static const bool done = [] {
    std::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)done;
}

CtxPtr make_context(bool server, const TlsCredentials& creds) {
  ignore_sigpipe();
  CtxPtr ctx(SSL_CTX_new(server ? TLS_server_method() : TLS_client_method()));
  if (!ctx) throw std::runtime_error("SSL_CTX_new: " + openssl_errors());
  SSL_CTX_set_min_proto_version(ctx.get(), TLS1_3_VERSION);
  SSL_CTX_set_max_proto_version(ctx.get(), TLS1_3_VERSION);
  if (SSL_CTX_use_certificate_chain_file(ctx.get(), creds.cert_file.c_str()) != 1 ||
      SSL_CTX_use_PrivateKey_file(ctx.get(), creds.key_file.c_str(), SSL_FILETYPE_PEM) != 1 ||
      SSL_CTX_check_private_key(ctx.get()) != 1) {
    throw ProtocolError(ErrorCode::kAuthenticationFailed,
                        "cannot load certificate/key: " + openssl_errors());
  }
  if (SSL_CTX_load_verify_locations(ctx.get(), creds.ca_file.c_str(), nullptr) != 1) {
    throw ProtocolError(ErrorCode::kAuthenticationFailed,
                        "cannot load CA file: " + openssl_errors());
  }
  SSL_CTX_set_verify(ctx.get(), SSL_VERIFY_PEER | SSL_VERIFY_FAIL_IF_NO_PEER_CERT, nullptr);
  return ctx;
}

void set_io_timeout(int fd, Timeout t) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(t.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((t.count() % 1000) * 1000);
  setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
  int one = 1;
  setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

// Not safe for concurrent send and recv from two threads: a session drives
// its channel from one thread.
class TlsChannel final : public Channel {
 public:
  TlsChannel(CtxPtr ctx, SSL* ssl, int fd) : ctx_(std::move(ctx)), ssl_(ssl), fd_(fd) {}
  ~TlsChannel() override {
    close();
    SSL_free(ssl_);
  }

  void close() override {
    if (fd_ < 0) return;
    SSL_shutdown(ssl_);
    ::close(fd_);
    fd_ = -1;
  }

 protected:
  void write_all(ByteView data) override {
    size_t done = 0;
    while (done < data.size()) {
      if (fd_ < 0) throw ProtocolError(ErrorCode::kConnectionLost, "channel closed");
      size_t written = 0;
      ERR_clear_error();
      errno = 0;
      if (SSL_write_ex(ssl_, data.data() + done, data.size() - done, &written) != 1) {
        throw_ssl_failure("write", false);
      }
      done += written;
    }
  }

  void read_exact(std::span<uint8_t> out) override {
    size_t done = 0;
    while (done < out.size()) {
      if (fd_ < 0) throw ProtocolError(ErrorCode::kConnectionLost, "channel closed");
      size_t got = 0;
      ERR_clear_error();
      errno = 0;
      if (SSL_read_ex(ssl_, out.data() + done, out.size() - done, &got) != 1) {
        if (SSL_get_error(ssl_, 0) == SSL_ERROR_ZERO_RETURN) {
          throw ProtocolError(ErrorCode::kConnectionLost, "peer closed the connection");
        }
        throw_ssl_failure("read", false);
      }
      done += got;
    }
  }

 private:
  CtxPtr ctx_;
  SSL* ssl_;
  int fd_;
};

std::unique_ptr<Channel> wrap(CtxPtr ctx, int fd, bool server) {
  SSL* ssl = SSL_new(ctx.get());
  if (!ssl) {
    ::close(fd);
    throw std::runtime_error("SSL_new: " + openssl_errors());
  }
  SSL_set_fd(ssl, fd);
  ERR_clear_error();
  errno = 0;
  int rc = server ? SSL_accept(ssl) : SSL_connect(ssl);
  if (rc != 1) {
    const bool timed_out = errno == EAGAIN || errno == EWOULDBLOCK;
    std::string detail = openssl_errors();
    SSL_free(ssl);
    ::close(fd);
    if (timed_out && detail == "unknown TLS error") {
      throw ProtocolError(ErrorCode::kTimeout, "TLS handshake");
    }
    throw ProtocolError(ErrorCode::kAuthenticationFailed, "TLS handshake: " + detail);
  }
  return std::make_unique<TlsChannel>(std::move(ctx), ssl, fd);
}

addrinfo* resolve(const std::string& host, uint16_t port, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port_str = std::to_string(port);
  int rc = getaddrinfo(host.empty() ? nullptr : host.c_str(), port_str.c_str(), &hints, &res);
  if (rc != 0) {
    throw ProtocolError(ErrorCode::kConnectionLost,
                        "cannot resolve " + host + ": " + gai_strerror(rc));
  }
  return res;
}

}  // namespace

TlsCredentials credentials_from_env(TlsCredentials base, bool override_set) {
  auto pick = [&](std::string& slot, const char* var) {
    const char* v = std::getenv(var);
    if (v && *v && (override_set || slot.empty())) slot = v;
  };
  pick(base.cert_file, "PPRL_TLS_CERT");
  pick(base.key_file, "PPRL_TLS_KEY");
  pick(base.ca_file, "PPRL_TLS_CA");
  return base;
}

struct TlsListener::Impl {
  CtxPtr ctx;
  int fd = -1;
  ~Impl() {
    if (fd >= 0) ::close(fd);
  }
};

TlsListener::TlsListener(const std::string& host, uint16_t port, const TlsCredentials& creds)
    : impl_(std::make_unique<Impl>()) {
  impl_->ctx = make_context(true, creds);
  addrinfo* res = resolve(host, port, true);
  std::string last_error = "no address";
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    int one = 1;
    setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 8) == 0) {
      impl_->fd = fd;
      break;
    }
    last_error = std::strerror(errno);
    ::close(fd);
  }
  freeaddrinfo(res);
  if (impl_->fd < 0) {
    throw ProtocolError(ErrorCode::kConnectionLost, "cannot listen: " + last_error);
  }
  sockaddr_storage addr{};
  socklen_t len = sizeof(addr);
  getsockname(impl_->fd, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.ss_family == AF_INET6
                    ? reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port
                    : reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
}

TlsListener::~TlsListener() = default;

std::unique_ptr<Channel> TlsListener::accept(Timeout accept_timeout, Timeout io_timeout) {
  pollfd pfd{impl_->fd, POLLIN, 0};
  int rc = ::poll(&pfd, 1, static_cast<int>(accept_timeout.count()));
  if (rc == 0) throw ProtocolError(ErrorCode::kTimeout, "no peer connected");
  if (rc < 0) throw ProtocolError(ErrorCode::kConnectionLost, std::strerror(errno));
  int fd = ::accept(impl_->fd, nullptr, nullptr);
  if (fd < 0) throw ProtocolError(ErrorCode::kConnectionLost, std::strerror(errno));
  set_io_timeout(fd, io_timeout);
  // Each session gets its own reference to the shared context.
  SSL_CTX_up_ref(impl_->ctx.get());
  return wrap(CtxPtr(impl_->ctx.get()), fd, true);
}

std::unique_ptr<Channel> tls_connect(const std::string& host, uint16_t port,
                                     const TlsCredentials& creds, Timeout io_timeout) {
  CtxPtr ctx = make_context(false, creds);
  addrinfo* res = resolve(host, port, false);
  int fd = -1;
  std::string last_error = "no address";
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    set_io_timeout(fd, io_timeout);
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    last_error = std::strerror(errno);
    ::close(fd);
    fd = -1;
  }
  freeaddrinfo(res);
  if (fd < 0) {
    throw ProtocolError(ErrorCode::kConnectionLost,
                        "cannot connect to " + host + ":" + std::to_string(port) + ": " +
                            last_error);
  }
  return wrap(std::move(ctx), fd, false);
}

std::pair<std::string, uint16_t> parse_endpoint(const std::string& endpoint) {
  const auto colon = endpoint.rfind(':');
  if (colon == std::string::npos || colon + 1 == endpoint.size()) {
    throw std::invalid_argument("endpoint must be host:port, got '" + endpoint + "'");
  }
  std::string host = endpoint.substr(0, colon);
  if (host.size() >= 2 && host.front() == '[' && host.back() == ']') {
    host = host.substr(1, host.size() - 2);
  }
  const std::string port_str = endpoint.substr(colon + 1);
  char* end = nullptr;
  long port = std::strtol(port_str.c_str(), &end, 10);
  if (*end != '\0' || port < 0 || port > 65535) {
    throw std::invalid_argument("bad port in endpoint '" + endpoint + "'");
  }
  return {host, static_cast<uint16_t>(port)};
}

}  // namespace pprl
