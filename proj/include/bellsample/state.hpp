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
 * Dense statevectors, exact ground states, and the single-copy and
 * doubled-copy outcome probabilities consumed by the estimators.
 *
 * Basis index bit k is qubit k.
 */

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "bellsample/pauli.hpp"

namespace bellsample {

using Complex = std::complex<double>;

/// Normalized pure state on n qubits; immutable after construction.
class StateVector {
 public:
  static constexpr double kNormTolerance = 1e-10;

  StateVector() = default;
  /// Throws unless the length is 2^n and the squared norm is 1 within 1e-10.
  StateVector(int n, std::vector<Complex> amplitudes);

  /// |b> for a computational basis index b.
  static StateVector basis(int n, std::size_t index);
  /// Normalizes arbitrary nonzero amplitudes.
  static StateVector normalized(int n, std::vector<Complex> amplitudes);

  int num_qubits() const noexcept { return n_; }
  std::size_t dimension() const noexcept { return amplitudes_.size(); }
  std::span<const Complex> amplitudes() const noexcept { return amplitudes_; }
  Complex operator[](std::size_t i) const { return amplitudes_[i]; }

 private:
  int n_ = 0;
  std::vector<Complex> amplitudes_;
};

/// P|psi> as an unnormalized amplitude vector.
std::vector<Complex> apply_pauli(const PauliString& p, std::span<const Complex> psi);

/// <psi|P|psi>; the imaginary part must be below 1e-10 and is discarded.
double expectation(const StateVector& state, const PauliString& p);

/// <psi|P|psi> as a complex number (P need not be Hermitian-phase-free).
Complex expectation_complex(const StateVector& state, const PauliString& p);

/// <psi|H|psi> including the constant.
double energy(const StateVector& state, const PauliHamiltonian& h);

struct GroundState {
  double energy = 0.0;
  StateVector state;
};

/// Largest qubit count accepted by ground_state.
inline constexpr int kMaxDenseQubits = 14;
/// Largest qubit count solved by full dense diagonalization; Lanczos above.
inline constexpr int kMaxFullDiagonalizationQubits = 8;

/**
 * Lowest eigenpair of h (constant included): full diagonalization of the
 * dense matrix up to kMaxFullDiagonalizationQubits, Lanczos with full
 * reorthogonalization on the matrix-free operator above that. Throws
 * NumericalError if the final residual |H z - E z| exceeds 1e-9 (|c_0| + sum|c_i|).
 */
GroundState ground_state(const PauliHamiltonian& h);
GroundState dense_ground_state(const PauliHamiltonian& h);
GroundState lanczos_ground_state(const PauliHamiltonian& h);

struct PauliMoments {
  std::vector<double> mu;
  std::vector<double> p;
  std::vector<double> q;
};
PauliMoments pauli_moments(const StateVector& state, const PauliHamiltonian& h);

/// Outcome probabilities indexed (+1,+1), (+1,-1), (-1,+1), (-1,-1).
using JointProbs = std::array<double, 4>;

/**
 * Probabilities of the eigenvalue pairs (t_i, t_j) of P_i (x) P_i and
 * P_j (x) P_j on |psi>|psi>:
 *   q^{(t_i,t_j)} = (1 + t_i mu_i^2 + t_j mu_j^2 + t_i t_j Re[<P_i P_j>^2]) / 4.
 */
JointProbs joint_probs_doubled(const StateVector& state, const PauliString& pi, const PauliString& pj);
/// Same, from precomputed mu_i, mu_j and <P_i P_j>.
JointProbs joint_probs_doubled(double mu_i, double mu_j, Complex product_expectation);

/**
 * Probabilities of the eigenvalue pairs (u_i, u_j) of two qubit-wise
 * commuting strings measured jointly on one copy:
 *   p^{(u_i,u_j)} = (1 + u_i mu_i + u_j mu_j + u_i u_j <P_i P_j>) / 4.
 * Throws if the strings are not qubit-wise commuting.
 */
JointProbs joint_probs_single(const StateVector& state, const PauliString& pi, const PauliString& pj);
JointProbs joint_probs_single(double mu_i, double mu_j, double product_expectation);

}  // namespace bellsample
