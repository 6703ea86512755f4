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

#include "pprl/group.hpp"

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/obj_mac.h>

#include <algorithm>
#include <cstring>

namespace pprl {

namespace {

struct BnCtxDeleter {
  void operator()(BN_CTX* c) const { BN_CTX_free(c); }
};
struct BnDeleter {
  void operator()(BIGNUM* b) const { BN_free(b); }
};
using BnPtr = std::unique_ptr<BIGNUM, BnDeleter>;

BN_CTX* ctx() {
  thread_local std::unique_ptr<BN_CTX, BnCtxDeleter> c(BN_CTX_new());
  if (!c) throw std::bad_alloc();
  return c.get();
}

BnPtr new_bn() {
  BnPtr b(BN_new());
  if (!b) throw std::bad_alloc();
  return b;
}

void check(int ok, const char* what) {
  if (ok != 1) throw std::runtime_error(std::string("P-256: ") + what + " failed");
}

struct Curve {
  EC_GROUP* group = nullptr;
  BnPtr p, a, b, q, z, sqrt_exp, minus_b_over_a, b_over_za;
  BN_MONT_CTX* mont_p = nullptr;

  Curve() {
    group = EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1);
    if (!group) throw std::runtime_error("P-256 unavailable in OpenSSL");
    p = new_bn();
    a = new_bn();
    b = new_bn();
    q = new_bn();
    check(EC_GROUP_get_curve(group, p.get(), a.get(), b.get(), ctx()), "get_curve");
    check(EC_GROUP_get_order(group, q.get(), ctx()), "get_order");

    z = new_bn();  // Z = -10 mod p
    check(BN_copy(z.get(), p.get()) != nullptr, "copy");
    check(BN_sub_word(z.get(), 10), "sub_word");

    sqrt_exp = new_bn();  // (p + 1) / 4, valid since p = 3 mod 4
    check(BN_copy(sqrt_exp.get(), p.get()) != nullptr, "copy");
    check(BN_add_word(sqrt_exp.get(), 1), "add_word");
    check(BN_rshift(sqrt_exp.get(), sqrt_exp.get(), 2), "rshift");

    BnPtr inv_a = new_bn();
    check(BN_mod_inverse(inv_a.get(), a.get(), p.get(), ctx()) != nullptr, "inverse");
    minus_b_over_a = new_bn();
    check(BN_mod_mul(minus_b_over_a.get(), b.get(), inv_a.get(), p.get(), ctx()), "mul");
    check(BN_mod_sub(minus_b_over_a.get(), p.get(), minus_b_over_a.get(), p.get(), ctx()), "sub");

    BnPtr za = new_bn();
    check(BN_mod_mul(za.get(), z.get(), a.get(), p.get(), ctx()), "mul");
    check(BN_mod_inverse(za.get(), za.get(), p.get(), ctx()) != nullptr, "inverse");
    b_over_za = new_bn();
    check(BN_mod_mul(b_over_za.get(), b.get(), za.get(), p.get(), ctx()), "mul");

    mont_p = BN_MONT_CTX_new();
    if (!mont_p) throw std::bad_alloc();
    check(BN_MONT_CTX_set(mont_p, p.get(), ctx()), "mont_set");
  }
  ~Curve() {
    BN_MONT_CTX_free(mont_p);
    EC_GROUP_free(group);
  }
  Curve(const Curve&) = delete;
  Curve& operator=(const Curve&) = delete;
};

const Curve& curve() {
  static const Curve c;
  return c;
}

std::array<uint8_t, 32> bn_to_32(const BIGNUM* bn) {
  std::array<uint8_t, 32> out{};
  check(BN_bn2binpad(bn, out.data(), 32) == 32 ? 1 : 0, "bn2binpad");
  return out;
}

EC_POINT* new_point() {
  EC_POINT* pt = EC_POINT_new(curve().group);
  if (!pt) throw std::bad_alloc();
  return pt;
}

// g(x) = x^3 + a*x + b
void curve_rhs(BIGNUM* out, const BIGNUM* x) {
  const Curve& c = curve();
  BnPtr t = new_bn();
  check(BN_mod_sqr(t.get(), x, c.p.get(), ctx()), "sqr");
  check(BN_mod_add(t.get(), t.get(), c.a.get(), c.p.get(), ctx()), "add");
  check(BN_mod_mul(t.get(), t.get(), x, c.p.get(), ctx()), "mul");
  check(BN_mod_add(out, t.get(), c.b.get(), c.p.get(), ctx()), "add");
}

// Returns true and sets root when v is a square mod p.
bool mod_sqrt(BIGNUM* root, const BIGNUM* v) {
  const Curve& c = curve();
  check(BN_mod_exp_mont(root, v, c.sqrt_exp.get(), c.p.get(), ctx(), c.mont_p), "exp");
  BnPtr check_sq = new_bn();
  check(BN_mod_sqr(check_sq.get(), root, c.p.get(), ctx()), "sqr");
  return BN_cmp(check_sq.get(), v) == 0;
}

}  // namespace

// ---- Scalar ---------------------------------------------------------------

void Scalar::Free::operator()(bignum_st* p) const { BN_clear_free(p); }

Scalar::Scalar() : bn_(BN_new()) {
  if (!bn_) throw std::bad_alloc();
  check(BN_one(bn_.get()), "one");
}

Scalar::Scalar(const Scalar& other) : bn_(BN_dup(other.bn_.get())) {
  if (!bn_) throw std::bad_alloc();
}

Scalar& Scalar::operator=(const Scalar& other) {
  if (this != &other) {
    Scalar tmp(other);
    std::swap(bn_, tmp.bn_);
  }
  return *this;
}

Scalar::Scalar(Scalar&&) noexcept = default;
Scalar& Scalar::operator=(Scalar&&) noexcept = default;
Scalar::~Scalar() = default;

Scalar Scalar::from_bytes(ByteView be) {
  Scalar s;
  check(BN_bin2bn(be.data(), static_cast<int>(be.size()), s.bn_.get()) != nullptr ? 1 : 0,
        "bin2bn");
  if (BN_is_zero(s.bn_.get()) || BN_cmp(s.bn_.get(), curve().q.get()) >= 0) {
    throw std::invalid_argument("scalar out of range [1, q-1]");
  }
  return s;
}

std::array<uint8_t, kScalarSize> Scalar::to_bytes() const { return bn_to_32(bn_.get()); }

Scalar Scalar::inverse() const {
  Scalar out;
  check(BN_mod_inverse(out.bn_.get(), bn_.get(), curve().q.get(), ctx()) != nullptr ? 1 : 0,
        "scalar inverse");
  return out;
}

Scalar Scalar::operator*(const Scalar& rhs) const {
  Scalar out;
  check(BN_mod_mul(out.bn_.get(), bn_.get(), rhs.bn_.get(), curve().q.get(), ctx()),
        "scalar mul");
  return out;
}

bool Scalar::operator==(const Scalar& rhs) const { return BN_cmp(bn_.get(), rhs.bn_.get()) == 0; }

namespace {

// Reduces 48 bytes mod q; statistical distance from uniform is ~2^-128.
bool scalar_from_wide(const uint8_t* wide, Scalar& out) {
  BnPtr v = new_bn();
  check(BN_bin2bn(wide, 48, v.get()) != nullptr ? 1 : 0, "bin2bn");
  check(BN_nnmod(v.get(), v.get(), curve().q.get(), ctx()), "nnmod");
  if (BN_is_zero(v.get())) return false;
  out = Scalar::from_bytes(bn_to_32(v.get()));
  return true;
}

}  // namespace

Scalar keygen() {
  Scalar s;
  std::array<uint8_t, 48> wide{};
  do {
    secure_random(wide);
  } while (!scalar_from_wide(wide.data(), s));
  std::fill(wide.begin(), wide.end(), 0);
  return s;
}

Scalar keygen_from_entropy(ByteView entropy) {
  Scalar s;
  for (uint32_t counter = 0;; ++counter) {
    static constexpr std::string_view kLabel = "pprl/keygen";
    Bytes msg(kLabel.begin(), kLabel.end());
    put_u32_be(msg, counter);
    msg.push_back(0);
    Digest256 lo = hmac_sha256(entropy, msg);
    msg.back() = 1;
    Digest256 hi = hmac_sha256(entropy, msg);
    std::array<uint8_t, 48> wide{};
    std::copy(lo.begin(), lo.end(), wide.begin());
    std::copy(hi.begin(), hi.begin() + 16, wide.begin() + 32);
    if (scalar_from_wide(wide.data(), s)) return s;
  }
}

std::array<uint8_t, kScalarSize> group_order() { return bn_to_32(curve().q.get()); }

// ---- GroupElement ---------------------------------------------------------

void GroupElement::Free::operator()(ec_point_st* p) const { EC_POINT_free(p); }

GroupElement::GroupElement() : point_(new_point()) {}

GroupElement::GroupElement(const GroupElement& other)
    : point_(EC_POINT_dup(other.point_.get(), curve().group)) {
  if (!point_) throw std::bad_alloc();
}

GroupElement& GroupElement::operator=(const GroupElement& other) {
  if (this == &other) return *this;
  if (!point_) point_.reset(new_point());
  check(EC_POINT_copy(point_.get(), other.point_.get()), "copy");
  return *this;
}

GroupElement::GroupElement(GroupElement&&) noexcept = default;
GroupElement& GroupElement::operator=(GroupElement&&) noexcept = default;
GroupElement::~GroupElement() = default;

bool GroupElement::operator==(const GroupElement& rhs) const {
  return EC_POINT_cmp(curve().group, point_.get(), rhs.point_.get(), ctx()) == 0;
}

std::array<uint8_t, 32> GroupElement::x() const {
  BnPtr x = new_bn();
  BnPtr y = new_bn();
  check(EC_POINT_get_affine_coordinates(curve().group, point_.get(), x.get(), y.get(), ctx()),
        "affine");
  return bn_to_32(x.get());
}

std::array<uint8_t, 32> GroupElement::y() const {
  BnPtr x = new_bn();
  BnPtr y = new_bn();
  check(EC_POINT_get_affine_coordinates(curve().group, point_.get(), x.get(), y.get(), ctx()),
        "affine");
  return bn_to_32(y.get());
}

GroupElement GroupElement::generator() {
  GroupElement g;
  check(EC_POINT_copy(g.point_.get(), EC_GROUP_get0_generator(curve().group)), "copy");
  return g;
}

// ---- hash to curve --------------------------------------------------------

Bytes expand_message_xmd(ByteView msg, std::string_view dst, size_t len_in_bytes) {
  constexpr size_t kB = 32;   // SHA-256 output
  constexpr size_t kS = 64;   // SHA-256 block
  const size_t ell = (len_in_bytes + kB - 1) / kB;
  if (ell > 255 || len_in_bytes > 65535 || dst.size() > 255) {
    throw std::invalid_argument("expand_message_xmd: length out of range");
  }
  Bytes dst_prime(dst.begin(), dst.end());
  dst_prime.push_back(static_cast<uint8_t>(dst.size()));

  Bytes msg_prime(kS, 0);
  if (!msg.empty()) msg_prime.insert(msg_prime.end(), msg.begin(), msg.end());
  put_u16_be(msg_prime, static_cast<uint16_t>(len_in_bytes));
  msg_prime.push_back(0);
  msg_prime.insert(msg_prime.end(), dst_prime.begin(), dst_prime.end());
  const Digest256 b0 = sha256(msg_prime);

  Bytes out;
  out.reserve(ell * kB);
  Digest256 prev{};
  for (size_t i = 1; i <= ell; ++i) {
    Bytes input(kB);
    for (size_t j = 0; j < kB; ++j) input[j] = (i == 1) ? b0[j] : (b0[j] ^ prev[j]);
    input.push_back(static_cast<uint8_t>(i));
    input.insert(input.end(), dst_prime.begin(), dst_prime.end());
    prev = sha256(input);
    out.insert(out.end(), prev.begin(), prev.end());
  }
  out.resize(len_in_bytes);
  return out;
}

std::vector<std::array<uint8_t, 32>> hash_to_field(ByteView msg, std::string_view dst,
                                                   size_t count) {
  constexpr size_t kL = 48;  // ceil((ceil(log2(p)) + 128) / 8)
  Bytes uniform = expand_message_xmd(msg, dst, count * kL);
  std::vector<std::array<uint8_t, 32>> out(count);
  BnPtr e = new_bn();
  for (size_t i = 0; i < count; ++i) {
    check(BN_bin2bn(uniform.data() + i * kL, kL, e.get()) != nullptr ? 1 : 0, "bin2bn");
    check(BN_nnmod(e.get(), e.get(), curve().p.get(), ctx()), "nnmod");
    out[i] = bn_to_32(e.get());
  }
  return out;
}

GroupElement map_to_curve(const std::array<uint8_t, 32>& u_bytes) {
  const Curve& c = curve();
  const BIGNUM* p = c.p.get();
  BN_CTX* cx = ctx();

  BnPtr u = new_bn();
  check(BN_bin2bn(u_bytes.data(), 32, u.get()) != nullptr ? 1 : 0, "bin2bn");

  BnPtr z_u2 = new_bn();  // Z * u^2
  check(BN_mod_sqr(z_u2.get(), u.get(), p, cx), "sqr");
  check(BN_mod_mul(z_u2.get(), z_u2.get(), c.z.get(), p, cx), "mul");

  BnPtr tv1 = new_bn();  // Z^2 u^4 + Z u^2
  check(BN_mod_sqr(tv1.get(), z_u2.get(), p, cx), "sqr");
  check(BN_mod_add(tv1.get(), tv1.get(), z_u2.get(), p, cx), "add");

  BnPtr x1 = new_bn();
  if (BN_is_zero(tv1.get())) {
    check(BN_copy(x1.get(), c.b_over_za.get()) != nullptr ? 1 : 0, "copy");
  } else {
    check(BN_mod_inverse(tv1.get(), tv1.get(), p, cx) != nullptr ? 1 : 0, "inverse");
    check(BN_add_word(tv1.get(), 1), "add_word");
    check(BN_mod_mul(x1.get(), c.minus_b_over_a.get(), tv1.get(), p, cx), "mul");
  }

  BnPtr gx = new_bn();
  BnPtr y = new_bn();
  BnPtr x = new_bn();
  curve_rhs(gx.get(), x1.get());
  if (mod_sqrt(y.get(), gx.get())) {
    check(BN_copy(x.get(), x1.get()) != nullptr ? 1 : 0, "copy");
  } else {
    check(BN_mod_mul(x.get(), z_u2.get(), x1.get(), p, cx), "mul");
    curve_rhs(gx.get(), x.get());
    if (!mod_sqrt(y.get(), gx.get())) throw std::logic_error("SSWU: g(x2) is not a square");
  }
  if (BN_is_odd(u.get()) != BN_is_odd(y.get()) && !BN_is_zero(y.get())) {
    check(BN_sub(y.get(), p, y.get()), "sub");
  }

  GroupElement out;
  check(EC_POINT_set_affine_coordinates(c.group, out.mutable_point(), x.get(), y.get(), cx),
        "set_affine");
  return out;
}

GroupElement hash_to_group(ByteView msg, std::string_view dst) {
  auto u = hash_to_field(msg, dst, 2);
  GroupElement q0 = map_to_curve(u[0]);
  GroupElement q1 = map_to_curve(u[1]);
  return add(q0, q1);
}

GroupElement add(const GroupElement& a, const GroupElement& b) {
  GroupElement out;
  check(EC_POINT_add(curve().group, out.mutable_point(), a.point(), b.point(), ctx()), "add");
  return out;
}

GroupElement exp(const GroupElement& e, const Scalar& k) {
  GroupElement out;
  check(EC_POINT_mul(curve().group, out.mutable_point(), nullptr, e.point(), k.bn(), ctx()),
        "point mul");
  return out;
}

ElementEncoding serialize(const GroupElement& e) {
  ElementEncoding out{};
  size_t n = EC_POINT_point2oct(curve().group, e.point(), POINT_CONVERSION_COMPRESSED, out.data(),
                                out.size(), ctx());
  if (n != kElementSize) throw std::logic_error("cannot serialize the point at infinity");
  return out;
}

GroupElement deserialize(ByteView bytes) {
  if (bytes.size() != kElementSize) throw MalformedElementError("wrong length");
  if (bytes[0] != 0x02 && bytes[0] != 0x03) throw MalformedElementError("bad prefix");
  GroupElement out;
  if (EC_POINT_oct2point(curve().group, out.mutable_point(), bytes.data(), bytes.size(), ctx()) !=
      1) {
    throw MalformedElementError("not a point on P-256");
  }
  return out;
}

}  // namespace pprl
