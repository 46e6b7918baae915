// Copyright 2026 The bellsample Authors
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

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace bellsample {

/// SplitMix64 finalizer; used to split one 64-bit seed into independent
/// per-worker streams.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of sub-stream `stream` of `seed`. Distinct streams give unrelated
/// seeds; the mapping is fixed so results do not depend on the worker count.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

/// The library's generator: a 64-bit Mersenne Twister seeded from a
/// SplitMix64-derived value.
class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  std::uint64_t seed() const noexcept { return seed_; }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Draws a binomial variate.
  std::int64_t binomial(std::int64_t trials, double p);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// Index drawn from a cumulative distribution (last entry is the total mass).
std::size_t sample_cdf(std::span<const double> cdf, double u);

/// Multinomial counts over `probs` (need not be normalized) for `trials`
/// draws, by sequential conditional binomials.
std::vector<std::int64_t> sample_multinomial(Rng& rng, std::span<const double> probs, std::int64_t trials);

}  // namespace bellsample
