/*
 * Copyright 2026 The fdnc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>

namespace fdnc {

// Philox4x32-10 counter-based generator. The 64-bit seed is the key, the
// 64-bit stream id occupies the upper half of the 128-bit counter, and the
// lower half is a block counter advanced once per four outputs. Identical
// (seed, stream) pairs give identical sequences on every platform.
class Rng {
 public:
  using Block = std::array<std::uint32_t, 4>;

  Rng(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  std::uint32_t next_u32() noexcept;
  std::uint64_t next_u64() noexcept;

  // 24 random bits scaled into [0, 1); exactly representable as float.
  float uniform_float() noexcept;
  // 53 random bits scaled into [0, 1).
  double uniform() noexcept;
  // Unbiased integer in [0, bound) by rejection; bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;
  double normal() noexcept;
  // Marsaglia-Tsang; shape > 0.
  double gamma(double shape) noexcept;

  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  // Raw keyed permutation; exposed for known-answer tests.
  static Block philox(Block counter, std::array<std::uint32_t, 2> key) noexcept;

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Block buffer_{};
  int used_ = 4;
};

// Stream ids below 2^32 belong to collaborators (stream id = collaborator id).
// Everything else is tagged in the upper bits so purposes never collide.
enum class StreamPurpose : std::uint64_t {
  kInit = 1,
  kSelection = 2,
  kPartition = 3,
  kDataset = 4,
  kTestSet = 5,
};

constexpr std::uint64_t purpose_stream(StreamPurpose purpose, std::uint64_t index = 0) {
  return (static_cast<std::uint64_t>(purpose) << 48) | (index & 0xFFFFFFFFFFFFull);
}

}  // namespace fdnc
