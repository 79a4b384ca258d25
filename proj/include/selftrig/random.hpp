// Copyright 2026 The selftrig Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>

namespace selftrig {

/**
 * Counter-based generator: SplitMix64 evaluated at an arbitrary position.
 *
 * bits(c) is the (c+1)-th output of a SplitMix64 sequence seeded with the
 * stream key, so draws can be addressed by (stream, counter) without any
 * sequential state. Streams are split by hashing a parent key with a label.
 */
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static std::uint64_t mix(std::uint64_t z);
  static std::uint64_t derive(std::uint64_t parent, std::uint64_t label);

  std::uint64_t key() const { return key_; }
  std::uint64_t bits(std::uint64_t counter) const;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform(std::uint64_t counter) const;
  /// Standard normal via Box-Muller on the uniforms at 2c and 2c+1.
  double normal(std::uint64_t counter) const;

 private:
  std::uint64_t key_;
};

}  // namespace selftrig
