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

#include "bellsample/rng.hpp"

#include <algorithm>
#include <numeric>

namespace bellsample {

std::int64_t Rng::binomial(std::int64_t trials, double p) {
  if (trials <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  std::binomial_distribution<std::int64_t> dist(trials, p);
  return dist(engine_);
}

std::size_t sample_cdf(std::span<const double> cdf, double u) {
  const double target = u * cdf.back();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
  const auto idx = static_cast<std::size_t>(it - cdf.begin());
  return std::min(idx, cdf.size() - 1);
}

std::vector<std::int64_t> sample_multinomial(Rng& rng, std::span<const double> probs, std::int64_t trials) {
  std::vector<std::int64_t> counts(probs.size(), 0);
  double remaining_mass = std::accumulate(probs.begin(), probs.end(), 0.0);
  std::int64_t remaining = trials;
  for (std::size_t k = 0; k < probs.size() && remaining > 0; ++k) {
    if (probs[k] <= 0.0) continue;
    const double p = remaining_mass > 0.0 ? probs[k] / remaining_mass : 1.0;
    const std::int64_t c = (k + 1 == probs.size()) ? remaining : rng.binomial(remaining, std::min(1.0, p));
    counts[k] = c;
    remaining -= c;
    remaining_mass -= probs[k];
  }
  if (remaining > 0) {
    // Rounding left mass unassigned; place it on the last positive category.
    for (std::size_t k = probs.size(); k-- > 0;) {
      if (probs[k] > 0.0) {
        counts[k] += remaining;
        break;
      }
    }
  }
  return counts;
}

}  // namespace bellsample
