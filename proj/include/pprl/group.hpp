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

#include <array>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "pprl/bytes.hpp"

struct bignum_st;
struct ec_point_st;

namespace pprl {

/// Prime-order group used for the commutative encryption H(x)^k: the NIST
/// P-256 curve, elements in compressed SEC1 form.
inline constexpr size_t kElementSize = 33;
inline constexpr size_t kScalarSize = 32;

using ElementEncoding = std::array<uint8_t, kElementSize>;

/// Domain-separation tags for the two hash-to-curve uses.
inline constexpr std::string_view kSignatureDst = "PPRL-LSHPSI-V01-CS01-with-P256_XMD:SHA-256_SSWU_RO_";
inline constexpr std::string_view kShingleDst = "PPRL-PSICA-V01-CS01-with-P256_XMD:SHA-256_SSWU_RO_";

class MalformedElementError : public std::runtime_error {
 public:
  explicit MalformedElementError(const std::string& what)
      : std::runtime_error("malformed element: " + what) {}
};

/// Exponent in [1, q-1].
class Scalar {
 public:
  Scalar();
  Scalar(const Scalar& other);
  Scalar& operator=(const Scalar& other);
  Scalar(Scalar&&) noexcept;
  Scalar& operator=(Scalar&&) noexcept;
  ~Scalar();

  /// Big-endian value; throws std::invalid_argument unless 1 <= v < q.
  static Scalar from_bytes(ByteView be);
  std::array<uint8_t, kScalarSize> to_bytes() const;

  Scalar inverse() const;
  Scalar operator*(const Scalar& rhs) const;
  bool operator==(const Scalar& rhs) const;

  const bignum_st* bn() const { return bn_.get(); }

 private:
  struct Free {
    void operator()(bignum_st* p) const;
  };
  std::unique_ptr<bignum_st, Free> bn_;
};

/// Fresh uniform scalar from the OS CSPRNG. Throws std::runtime_error on
/// entropy failure.
Scalar keygen();
/// Deterministic scalar from caller-supplied entropy (tests, replay).
Scalar keygen_from_entropy(ByteView entropy);

/// The group order q, big-endian.
std::array<uint8_t, kScalarSize> group_order();

class GroupElement {
 public:
  GroupElement();
  GroupElement(const GroupElement& other);
  GroupElement& operator=(const GroupElement& other);
  GroupElement(GroupElement&&) noexcept;
  GroupElement& operator=(GroupElement&&) noexcept;
  ~GroupElement();

  bool operator==(const GroupElement& rhs) const;

  /// Affine coordinates, big-endian, for test vectors.
  std::array<uint8_t, 32> x() const;
  std::array<uint8_t, 32> y() const;

  const ec_point_st* point() const { return point_.get(); }
  ec_point_st* mutable_point() { return point_.get(); }

  static GroupElement generator();

 private:
  struct Free {
    void operator()(ec_point_st* p) const;
  };
  std::unique_ptr<ec_point_st, Free> point_;
};

/// expand_message_xmd with SHA-256 (RFC 9380, section 5.3.1).
Bytes expand_message_xmd(ByteView msg, std::string_view dst, size_t len_in_bytes);

/// hash_to_field producing `count` field elements of P-256, big-endian.
std::vector<std::array<uint8_t, 32>> hash_to_field(ByteView msg, std::string_view dst,
                                                   size_t count);

/// Simplified SWU map for P-256 (Z = -10). Maps a field element to a curve
/// point without any known discrete log relation to the generator.
GroupElement map_to_curve(const std::array<uint8_t, 32>& u);

/// P256_XMD:SHA-256_SSWU_RO_: two field elements, two SSWU maps, one point
/// addition. The cofactor is 1.
GroupElement hash_to_group(ByteView msg, std::string_view dst = kSignatureDst);

GroupElement exp(const GroupElement& e, const Scalar& k);

ElementEncoding serialize(const GroupElement& e);
/// Rejects wrong length, bad prefix, x >= p, and x not on the curve.
GroupElement deserialize(ByteView bytes);

/// Point addition; used by tests of the group law.
GroupElement add(const GroupElement& a, const GroupElement& b);

}  // namespace pprl
