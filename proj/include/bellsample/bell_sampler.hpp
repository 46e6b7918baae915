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

/**
 * @file
 * Bell-basis measurement of |psi>|psi>, qubit pair by qubit pair.
 *
 * Pair k is read out after CNOT (copy-1 qubit k controls copy-2 qubit k)
 * and H on the control. The target bit is the flip bit a_k, the control bit
 * the phase bit b_k:
 *
 *     Psi+ = (|00>+|11>)/sqrt2  (a,b) = (0,0)
 *     Psi- = (|00>-|11>)/sqrt2  (a,b) = (0,1)
 *     Phi+ = (|01>+|10>)/sqrt2  (a,b) = (1,0)
 *     Phi- = (|01>-|10>)/sqrt2  (a,b) = (1,1)
 *
 * An outcome over all n pairs is a pair of n-bit words (a, b) drawn with
 * probability 2^{-n} |sum_x (-1)^{b.x} psi(x) psi(x^a)|^2.
 */

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bellsample/pauli.hpp"
#include "bellsample/rng.hpp"
#include "bellsample/state.hpp"

namespace bellsample {

enum class BellLabel : std::uint8_t { PsiPlus = 0, PsiMinus = 1, PhiPlus = 2, PhiMinus = 3 };

constexpr BellLabel make_label(int flip, int phase) { return static_cast<BellLabel>((flip << 1) | phase); }
constexpr int flip_bit(BellLabel l) { return (static_cast<int>(l) >> 1) & 1; }
constexpr int phase_bit(BellLabel l) { return static_cast<int>(l) & 1; }

/// Eigenvalue of sigma (x) sigma on the Bell state `label`.
int bell_eigenvalue(PauliLetter sigma, BellLabel label);

/// One Bell measurement of all n pairs.
struct BellOutcome {
  int n = 0;
  std::uint64_t flips = 0;   ///< bit k = a_k
  std::uint64_t phases = 0;  ///< bit k = b_k

  BellLabel label(int k) const { return make_label(static_cast<int>((flips >> k) & 1U), static_cast<int>((phases >> k) & 1U)); }
  friend bool operator==(const BellOutcome&, const BellOutcome&) = default;
};

/// Lambda_P(B) = prod_k lambda_{sigma_k}(B_k), +1 or -1.
int lambda_product(const PauliString& p, const BellOutcome& b);

/// N1 i.i.d. outcomes in draw order.
struct BellShotBatch {
  std::vector<BellOutcome> outcomes;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return outcomes.size(); }
};

/// Histogram form of a batch: distinct words and their multiplicities.
struct BellCounts {
  int n = 0;
  std::vector<std::uint64_t> flips;
  std::vector<std::uint64_t> phases;
  std::vector<std::int64_t> counts;
  std::uint64_t seed = 0;

  std::int64_t total() const;
  static BellCounts from_batch(const BellShotBatch& batch);
};

/**
 * Reference sampler: each shot draws the flip word a from
 * p(a) = sum_x |psi(x) psi(x^a)|^2, forms v_a(x) = psi(x) psi(x^a), applies
 * the Walsh-Hadamard transform and draws the phase word from |WHT v_a|^2.
 * Cost O(n 2^n) per shot. Deterministic in `seed`.
 */
BellShotBatch sample_bell_outcomes(const StateVector& state, std::int64_t n1, std::uint64_t seed);

/**
 * Exact outcome distribution of the two-stage sampler, with the expensive
 * per-flip-word tables computed once. sample() draws a whole batch as a
 * histogram (multinomial over flip words, then over phase words within each
 * flip word), in O(4^n) independent of the shot count.
 */
class BellDistribution {
 public:
  explicit BellDistribution(const StateVector& state);

  int num_qubits() const noexcept { return n_; }
  /// p(a) for every flip word a.
  std::span<const double> flip_probabilities() const noexcept { return flip_probs_; }
  /// p(b | a) for every phase word b.
  std::span<const double> phase_probabilities(std::uint64_t flip) const;
  /// p(a, b).
  double probability(std::uint64_t flip, std::uint64_t phase) const;

  BellCounts sample(std::int64_t n1, std::uint64_t seed) const;

 private:
  int n_ = 0;
  std::vector<double> flip_probs_;
  std::vector<double> phase_probs_;  // row a holds p(. | a); empty rows for p(a) = 0
};

/// p(a, b) from the explicit 2^{2n} doubled state projected on every Bell
/// word; test oracle for small n (n <= 5).
std::vector<double> brute_force_bell_distribution(const StateVector& state);

struct AbsEstimate {
  double a_hat = 0.0;  ///< mean of Lambda_P, estimates <P>^2
  double b_hat = 0.0;  ///< sqrt(max(0, a_hat)), estimates |<P>|
};

AbsEstimate estimate_abs(const BellShotBatch& batch, const PauliString& p);
/// One pass over the batch serving every term of h.
std::vector<AbsEstimate> estimate_abs(const BellCounts& counts, const PauliHamiltonian& h);

/// One line per shot: n two-bit labels (a b) packed most-significant pair
/// first, written as hex.
std::string dump_batch(const BellShotBatch& batch);

}  // namespace bellsample
