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
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pprl {

using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;
using Digest256 = std::array<uint8_t, 32>;

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const uint8_t*>(s.data()), s.size()};
}

std::string to_hex(ByteView bytes);
Bytes from_hex(std::string_view hex);

Digest256 sha256(ByteView data);
inline Digest256 sha256(std::string_view s) { return sha256(as_bytes(s)); }

Digest256 hmac_sha256(ByteView key, ByteView msg);

void put_u16_be(Bytes& out, uint16_t v);
void put_u32_be(Bytes& out, uint32_t v);
void put_u64_be(Bytes& out, uint64_t v);
uint16_t get_u16_be(const uint8_t* p);
uint32_t get_u32_be(const uint8_t* p);
uint64_t get_u64_be(const uint8_t* p);

/// Fills `out` from the OpenSSL CSPRNG. Throws std::runtime_error when the
/// generator reports failure.
void secure_random(std::span<uint8_t> out);

/// UniformRandomBitGenerator over the OS CSPRNG, for secret permutations.
class SecureRng {
 public:
  using result_type = uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()();

 private:
  std::array<uint64_t, 64> buf_{};
  size_t pos_ = buf_.size();
};

}  // namespace pprl
