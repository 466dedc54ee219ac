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

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace lsevoc {

// 128-bit identity used for config fingerprints and path-derived ids.
using Fingerprint = std::array<std::uint8_t, 16>;

// Two independent 64-bit FNV-1a lanes (different offset bases).
class Fnv128 {
 public:
  Fnv128& update(const void* data, std::size_t size);
  Fnv128& update(std::string_view text) { return update(text.data(), text.size()); }
  template <typename T>
  Fnv128& update_pod(const T& value) {
    return update(&value, sizeof(T));
  }
  Fingerprint digest() const;

 private:
  std::uint64_t lo_ = 0xcbf29ce484222325ULL;
  std::uint64_t hi_ = 0x84222325cbf29ce4ULL;
};

std::string to_hex(const Fingerprint& fp);
Fingerprint fingerprint_of(std::string_view text);

// splitmix64 finalizer; used to derive per-step seeds from (seed, step).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace lsevoc
