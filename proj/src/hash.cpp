// Copyright 2026 The lsevoc Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lsevoc/hash.hpp"

#include <cstdio>

namespace lsevoc {

Fnv128& Fnv128::update(const void* data, std::size_t size) {
  constexpr std::uint64_t kPrime = 0x100000001b3ULL;
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    lo_ = (lo_ ^ bytes[i]) * kPrime;
    hi_ = (hi_ ^ static_cast<unsigned char>(bytes[i] + 0x5bu)) * kPrime;
  }
  return *this;
}

Fingerprint Fnv128::digest() const {
  Fingerprint out{};
  for (int i = 0; i < 8; ++i) {
    out[i] = static_cast<std::uint8_t>(lo_ >> (8 * i));
    out[8 + i] = static_cast<std::uint8_t>(hi_ >> (8 * i));
  }
  return out;
}

std::string to_hex(const Fingerprint& fp) {
  std::string s;
  s.reserve(32);
  char buf[3];
  for (auto b : fp) {
    std::snprintf(buf, sizeof(buf), "%02x", b);
    s += buf;
  }
  return s;
}

Fingerprint fingerprint_of(std::string_view text) { return Fnv128{}.update(text).digest(); }

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace lsevoc
