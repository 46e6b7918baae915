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

#include "bellsample/bell_sampler.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "bellsample/error.hpp"
#include "bellsample/kernels.hpp"

namespace bellsample {

namespace {

constexpr int kMaxTabulatedQubits = 12;

/// |WHT(v_a)|^2 where v_a(x) = psi(x) psi(x^a), written into out.
void conditional_weights(std::span<const Complex> psi, std::uint64_t flip, std::vector<Complex>& scratch,
                         std::span<double> out) {
  for (std::size_t x = 0; x < psi.size(); ++x) scratch[x] = psi[x] * psi[x ^ flip];
  kernels::serial::walsh_hadamard(scratch);
  for (std::size_t b = 0; b < psi.size(); ++b) out[b] = std::norm(scratch[b]);
}

std::vector<double> flip_distribution(std::span<const Complex> psi) {
  std::vector<double> p(psi.size(), 0.0);
  for (std::size_t a = 0; a < psi.size(); ++a) {
    double s = 0.0;
    for (std::size_t x = 0; x < psi.size(); ++x) s += std::norm(psi[x]) * std::norm(psi[x ^ a]);
    p[a] = s;
  }
  return p;
}

std::vector<double> to_cdf(std::span<const double> w) {
  std::vector<double> cdf(w.size());
  std::partial_sum(w.begin(), w.end(), cdf.begin());
  return cdf;
}

/// Category counts for `trials` draws from weights w. Picks whichever of
/// per-draw inversion and sequential binomials is cheaper; both give the
/// multinomial law.
std::vector<std::int64_t> draw_counts(Rng& rng, std::span<const double> w, std::int64_t trials) {
  if (trials * 8 < static_cast<std::int64_t>(w.size())) {
    const auto cdf = to_cdf(w);
    std::vector<std::int64_t> counts(w.size(), 0);
    for (std::int64_t t = 0; t < trials; ++t) ++counts[sample_cdf(cdf, rng.uniform())];
    return counts;
  }
  return sample_multinomial(rng, w, trials);
}

}  // namespace

int bell_eigenvalue(PauliLetter sigma, BellLabel label) {
  const int lx = phase_bit(label) ? -1 : 1;
  const int lz = flip_bit(label) ? -1 : 1;
  switch (sigma) {
    case PauliLetter::I: return 1;
    case PauliLetter::X: return lx;
    case PauliLetter::Z: return lz;
    case PauliLetter::Y: return -lx * lz;
  }
  return 1;
}

int lambda_product(const PauliString& p, const BellOutcome& b) {
  if (p.num_qubits() != b.n) throw Error("lambda_product: Pauli string and Bell outcome lengths differ");
  const int odd = (std::popcount(b.phases & p.x_mask()) + std::popcount(b.flips & p.z_mask()) + p.num_y()) & 1;
  return odd ? -1 : 1;
}

std::int64_t BellCounts::total() const { return std::accumulate(counts.begin(), counts.end(), std::int64_t{0}); }

BellCounts BellCounts::from_batch(const BellShotBatch& batch) {
  BellCounts c;
  c.seed = batch.seed;
  if (batch.outcomes.empty()) return c;
  c.n = batch.outcomes.front().n;
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::int64_t> tally;
  for (const auto& o : batch.outcomes) ++tally[{o.flips, o.phases}];
  for (const auto& [key, count] : tally) {
    c.flips.push_back(key.first);
    c.phases.push_back(key.second);
    c.counts.push_back(count);
  }
  return c;
}

BellShotBatch sample_bell_outcomes(const StateVector& state, std::int64_t n1, std::uint64_t seed) {
  if (n1 < 1) throw Error("sample_bell_outcomes: shot count must be positive");
  const auto psi = state.amplitudes();
  const auto flip_cdf = to_cdf(flip_distribution(psi));
  Rng rng(seed);
  BellShotBatch batch;
  batch.seed = seed;
  batch.outcomes.reserve(static_cast<std::size_t>(n1));
  std::vector<Complex> scratch(psi.size());
  std::vector<double> weights(psi.size());
  for (std::int64_t t = 0; t < n1; ++t) {
    const std::uint64_t a = sample_cdf(flip_cdf, rng.uniform());
    conditional_weights(psi, a, scratch, weights);
    const auto cdf = to_cdf(weights);
    assert(cdf.back() > 0.0 && "zero-norm conditional");
    const std::uint64_t b = sample_cdf(cdf, rng.uniform());
    batch.outcomes.push_back({state.num_qubits(), a, b});
  }
  return batch;
}

BellDistribution::BellDistribution(const StateVector& state) : n_(state.num_qubits()) {
  if (n_ > kMaxTabulatedQubits) {
    throw Error("BellDistribution tabulates 4^n probabilities; " + std::to_string(n_) + " qubits exceeds the " +
                std::to_string(kMaxTabulatedQubits) + "-qubit limit");
  }
  const auto psi = state.amplitudes();
  const std::size_t dim = psi.size();
  flip_probs_ = flip_distribution(psi);
  phase_probs_.assign(dim * dim, 0.0);
  kernels::ExceptionSlot slot;
  const auto d = static_cast<std::int64_t>(dim);
#pragma omp parallel
  {
    std::vector<Complex> scratch(dim);
#pragma omp for schedule(dynamic, 8)
    for (std::int64_t a = 0; a < d; ++a) {
      slot.run([&] {
        if (flip_probs_[a] <= 0.0) return;
        std::span<double> row(phase_probs_.data() + a * d, dim);
        conditional_weights(psi, static_cast<std::uint64_t>(a), scratch, row);
        const double total = std::accumulate(row.begin(), row.end(), 0.0);
        if (!(total > 0.0)) throw NumericalError("zero-norm conditional phase distribution");
        for (auto& v : row) v /= total;
      });
    }
  }
  slot.rethrow();
}

std::span<const double> BellDistribution::phase_probabilities(std::uint64_t flip) const {
  const std::size_t dim = flip_probs_.size();
  return {phase_probs_.data() + flip * dim, dim};
}

double BellDistribution::probability(std::uint64_t flip, std::uint64_t phase) const {
  return flip_probs_.at(flip) * phase_probabilities(flip)[phase];
}

BellCounts BellDistribution::sample(std::int64_t n1, std::uint64_t seed) const {
  if (n1 < 1) throw Error("BellDistribution::sample: shot count must be positive");
  Rng rng(seed);
  BellCounts out;
  out.n = n_;
  out.seed = seed;
  const auto flip_counts = draw_counts(rng, flip_probs_, n1);
  for (std::size_t a = 0; a < flip_counts.size(); ++a) {
    if (flip_counts[a] == 0) continue;
    const auto phase_counts = draw_counts(rng, phase_probabilities(a), flip_counts[a]);
    for (std::size_t b = 0; b < phase_counts.size(); ++b) {
      if (phase_counts[b] == 0) continue;
      out.flips.push_back(a);
      out.phases.push_back(b);
      out.counts.push_back(phase_counts[b]);
    }
  }
  return out;
}

std::vector<double> brute_force_bell_distribution(const StateVector& state) {
  const int n = state.num_qubits();
  if (n > 5) throw Error("brute_force_bell_distribution is limited to 5 qubits");
  const std::size_t dim = state.dimension();
  // Doubled state: index x | (y << n), copy 1 in the low bits.
  std::vector<Complex> doubled(dim * dim);
  for (std::size_t y = 0; y < dim; ++y)
    for (std::size_t x = 0; x < dim; ++x) doubled[x | (y << n)] = state[x] * state[y];

  const double amp = 1.0 / std::sqrt(2.0);
  std::vector<double> probs(dim * dim, 0.0);
  for (std::size_t a = 0; a < dim; ++a) {
    for (std::size_t b = 0; b < dim; ++b) {
      // |B> = prod_k |B_k>, each pair (x_k, y_k) independently.
      std::vector<Complex> bell(dim * dim, Complex{1.0, 0.0});
      for (int k = 0; k < n; ++k) {
        const int ak = static_cast<int>((a >> k) & 1U);
        const int bk = static_cast<int>((b >> k) & 1U);
        for (std::size_t idx = 0; idx < bell.size(); ++idx) {
          const int xk = static_cast<int>((idx >> k) & 1U);
          const int yk = static_cast<int>((idx >> (n + k)) & 1U);
          double c = 0.0;
          if (xk == 0 && yk == ak) c = amp;
          if (xk == 1 && yk == 1 - ak) c = bk ? -amp : amp;
          bell[idx] *= c;
        }
      }
      Complex overlap = 0.0;
      for (std::size_t idx = 0; idx < bell.size(); ++idx) overlap += std::conj(bell[idx]) * doubled[idx];
      probs[a * dim + b] = std::norm(overlap);
    }
  }
  return probs;
}

AbsEstimate estimate_abs(const BellShotBatch& batch, const PauliString& p) {
  if (batch.outcomes.empty()) throw Error("estimate_abs: empty batch");
  std::int64_t sum = 0;
  for (const auto& o : batch.outcomes) sum += lambda_product(p, o);
  const double a = static_cast<double>(sum) / static_cast<double>(batch.outcomes.size());
  return {a, std::sqrt(std::max(0.0, a))};
}

std::vector<AbsEstimate> estimate_abs(const BellCounts& counts, const PauliHamiltonian& h) {
  const std::int64_t total = counts.total();
  if (total <= 0) throw Error("estimate_abs: empty batch");
  if (counts.n != h.num_qubits()) throw Error("estimate_abs: batch and Hamiltonian qubit counts differ");
  const auto sums = kernels::lambda_sums(counts.flips, counts.phases, counts.counts, h.terms());
  std::vector<AbsEstimate> out;
  out.reserve(sums.size());
  for (const auto s : sums) {
    const double a = static_cast<double>(s) / static_cast<double>(total);
    out.push_back({a, std::sqrt(std::max(0.0, a))});
  }
  return out;
}

std::string dump_batch(const BellShotBatch& batch) {
  std::string out;
  for (const auto& o : batch.outcomes) {
    const int digits = std::max(1, (2 * o.n + 3) / 4);
    std::string line(static_cast<std::size_t>(digits), '0');
    // Pair k occupies bits 2k (phase) and 2k+1 (flip) of the packed word.
    for (int k = 0; k < o.n; ++k) {
      const int code = (static_cast<int>((o.flips >> k) & 1U) << 1) | static_cast<int>((o.phases >> k) & 1U);
      const int bit = 2 * k;
      const int digit = digits - 1 - bit / 4;
      int value = line[digit] <= '9' ? line[digit] - '0' : line[digit] - 'a' + 10;
      value |= code << (bit % 4);
      line[digit] = "0123456789abcdef"[value];
    }
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace bellsample
