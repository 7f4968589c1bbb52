/*
 * Copyright 2026 The cartforest Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Counter-based random streams.
//
// Every stream is Philox4x32-10 keyed by a 64-bit key. The 128-bit counter
// is (block index, stream id): the low 64 bits count blocks, the high 64 bits
// select a sub-stream, so (key, stream id) pairs never overlap. Derived keys
// are produced with derive_key(), which chains the SplitMix64 finalizer over
// (parent, tags...). A stream is therefore fully determined by the tuple that
// named it, independent of how many other streams exist or in which order
// they are consumed.
//
// Conversions:
//   uniform()      (u64 >> 11) * 2^-53                  in [0, 1)
//   uniform_open() ((u64 >> 11) + 0.5) * 2^-53          in (0, 1)
//   below(k)       Lemire multiply-shift with rejection  in [0, k)
//   gaussian()     inverse_normal_cdf(uniform_open())   (Wichura AS241)

#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace cartforest {

// One Philox4x32-10 block.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

std::uint64_t splitmix64_mix(std::uint64_t x);

// Key of a child stream named by `tags` under `parent`.
std::uint64_t derive_key(std::uint64_t parent, std::initializer_list<std::uint64_t> tags);

// Standard normal quantile; p in (0, 1). Relative accuracy about 1e-16.
double inverse_normal_cdf(double p);

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key, std::uint64_t stream_id = 0);

  std::uint64_t next_u64();
  double uniform();
  double uniform_open();
  // Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);
  double gaussian();

  std::uint64_t key() const { return key_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  void refill();

  std::uint64_t key_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;  // 32-bit words consumed from buffer_
};

}  // namespace cartforest
