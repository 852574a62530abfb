/*
 * Copyright 2026 The truthfl Authors
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
#ifndef TRUTHFL_RNG_HPP_
#define TRUTHFL_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace truthfl {

using RandomStream = std::mt19937_64;

// Purpose tags for derived streams. Each stochastic site in the simulator
// draws from its own stream so that adding or reordering work elsewhere
// leaves it untouched.
namespace stream_tag {
inline constexpr std::uint64_t kData = 1;
inline constexpr std::uint64_t kPartition = 2;
inline constexpr std::uint64_t kRoster = 3;
inline constexpr std::uint64_t kBatching = 4;
inline constexpr std::uint64_t kAttackNoise = 5;
inline constexpr std::uint64_t kAggregatorNoise = 6;
inline constexpr std::uint64_t kModelInit = 7;
inline constexpr std::uint64_t kPoison = 8;
inline constexpr std::uint64_t kServer = 9;
inline constexpr std::uint64_t kBench = 10;
}  // namespace stream_tag

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag,
                                    std::uint64_t round = 0, std::uint64_t client = 0) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ tag);
  h = splitmix64(h ^ round);
  return splitmix64(h ^ client);
}

inline RandomStream derive_stream(std::uint64_t master, std::uint64_t tag,
                                  std::uint64_t round = 0, std::uint64_t client = 0) {
  return RandomStream(derive_seed(master, tag, round, client));
}

}  // namespace truthfl

#endif  // TRUTHFL_RNG_HPP_
