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

#include "bellsample/state.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <string>

#include "bellsample/error.hpp"
#include "bellsample/kernels.hpp"
#include "bellsample/rng.hpp"

namespace bellsample {

namespace {

double norm_sq(std::span<const Complex> v) {
  double s = 0.0;
  for (const auto& a : v) s += std::norm(a);
  return s;
}

void check_dimension(int n, std::size_t size) {
  if (n < 1 || n > kMaxDenseQubits + 2) throw Error("statevector qubit count out of range");
  if (size != (std::size_t{1} << n)) {
    throw Error("statevector of length " + std::to_string(size) + " does not match " + std::to_string(n) + " qubits");
  }
}

void check_same(const StateVector& s, const PauliString& p) {
  if (s.num_qubits() != p.num_qubits()) {
    throw Error("Pauli string on " + std::to_string(p.num_qubits()) + " qubits applied to a " +
                std::to_string(s.num_qubits()) + "-qubit state");
  }
}

}  // namespace

StateVector::StateVector(int n, std::vector<Complex> amplitudes) : n_(n), amplitudes_(std::move(amplitudes)) {
  check_dimension(n, amplitudes_.size());
  const double ns = norm_sq(amplitudes_);
  if (std::abs(ns - 1.0) > kNormTolerance) throw Error("statevector is not normalized (|psi|^2 = " + std::to_string(ns) + ")");
}

StateVector StateVector::basis(int n, std::size_t index) {
  std::vector<Complex> a(std::size_t{1} << n, Complex{0.0, 0.0});
  a.at(index) = 1.0;
  return {n, std::move(a)};
}

StateVector StateVector::normalized(int n, std::vector<Complex> amplitudes) {
  check_dimension(n, amplitudes.size());
  const double ns = norm_sq(amplitudes);
  if (!(ns > 0.0)) throw Error("cannot normalize a zero vector");
  const double inv = 1.0 / std::sqrt(ns);
  for (auto& a : amplitudes) a *= inv;
  return {n, std::move(amplitudes)};
}

std::vector<Complex> apply_pauli(const PauliString& p, std::span<const Complex> psi) {
  std::vector<Complex> out(psi.size());
  const Complex phase = std::pow(Complex{0.0, 1.0}, p.num_y());
  for (std::size_t x = 0; x < psi.size(); ++x) {
    const double s = (std::popcount(x & p.z_mask()) & 1) ? -1.0 : 1.0;
    out[x ^ p.x_mask()] = phase * s * psi[x];
  }
  return out;
}

Complex expectation_complex(const StateVector& state, const PauliString& p) {
  check_same(state, p);
  const PauliString one[] = {p};
  return kernels::serial::pauli_expectations(state.amplitudes(), one).front();
}

double expectation(const StateVector& state, const PauliString& p) {
  const Complex v = expectation_complex(state, p);
  if (std::abs(v.imag()) > 1e-10) throw Error("expectation of a Pauli string has imaginary part " + std::to_string(v.imag()));
  return v.real();
}

double energy(const StateVector& state, const PauliHamiltonian& h) {
  const auto m = pauli_moments(state, h);
  double e = h.constant();
  for (std::size_t i = 0; i < h.size(); ++i) e += h.term(i).coefficient * m.mu[i];
  return e;
}

GroundState dense_ground_state(const PauliHamiltonian& h) {
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << h.num_qubits());
  std::vector<Complex> amplitudes(static_cast<std::size_t>(dim));
  double w = 0.0;
  if (h.is_real()) {
    auto a = kernels::dense_matrix_real(h);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::Map<const Eigen::MatrixXd>(a.data(), dim, dim));
    if (es.info() != Eigen::Success) throw NumericalError("dense eigensolver did not converge");
    w = es.eigenvalues()(0);
    for (Eigen::Index k = 0; k < dim; ++k) amplitudes[static_cast<std::size_t>(k)] = es.eigenvectors()(k, 0);
  } else {
    auto a = kernels::dense_matrix(h);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Eigen::Map<const Eigen::MatrixXcd>(a.data(), dim, dim));
    if (es.info() != Eigen::Success) throw NumericalError("dense eigensolver did not converge");
    w = es.eigenvalues()(0);
    for (Eigen::Index k = 0; k < dim; ++k) amplitudes[static_cast<std::size_t>(k)] = es.eigenvectors()(k, 0);
  }
  return {w, StateVector::normalized(h.num_qubits(), std::move(amplitudes))};
}

GroundState lanczos_ground_state(const PauliHamiltonian& h) {
  if (h.num_qubits() > kMaxDenseQubits) {
    throw Error("ground_state: " + std::to_string(h.num_qubits()) + " qubits exceeds the limit of " +
                std::to_string(kMaxDenseQubits));
  }
  const std::size_t dim = std::size_t{1} << h.num_qubits();
  const std::size_t kmax = std::min<std::size_t>(dim, 240);
  const double scale = std::abs(h.constant()) + h.l1_norm();
  const double tol = 1e-12 * std::max(1.0, scale);

  std::vector<Complex> start(dim);
  {
    Rng rng(0x6C616E637A6F73ULL);
    std::normal_distribution<double> g;
    const bool real = h.is_real();
    for (auto& a : start) a = real ? Complex{g(rng), 0.0} : Complex{g(rng), g(rng)};
    const double inv = 1.0 / std::sqrt(norm_sq(start));
    for (auto& a : start) a *= inv;
  }

  auto dot = [](const std::vector<Complex>& a, const std::vector<Complex>& b) {
    Complex s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += std::conj(a[k]) * b[k];
    return s;
  };

  double residual = 0.0;
  for (int restart = 0; restart < 40; ++restart) {
    std::vector<std::vector<Complex>> basis{start};
    std::vector<double> alpha, beta;
    Eigen::VectorXd ritz;
    bool done = false;
    for (std::size_t j = 0; j < kmax && !done; ++j) {
      auto w = kernels::apply_hamiltonian(h, basis[j]);
      alpha.push_back(dot(basis[j], w).real());
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& v : basis) {
          const Complex c = dot(v, w);
          for (std::size_t k = 0; k < dim; ++k) w[k] -= c * v[k];
        }
      }
      const double b = std::sqrt(norm_sq(w));
      const auto m = static_cast<Eigen::Index>(alpha.size());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
      tri.computeFromTridiagonal(Eigen::Map<const Eigen::VectorXd>(alpha.data(), m),
                                 Eigen::Map<const Eigen::VectorXd>(beta.data(), m - 1), Eigen::ComputeEigenvectors);
      ritz = tri.eigenvectors().col(0);
      residual = b * std::abs(ritz(m - 1));
      if (residual < tol || b < tol || j + 1 == kmax) {
        done = true;
      } else {
        beta.push_back(b);
        for (auto& a : w) a /= b;
        basis.push_back(std::move(w));
      }
    }
    std::fill(start.begin(), start.end(), Complex{0.0, 0.0});
    for (std::size_t i = 0; i < static_cast<std::size_t>(ritz.size()); ++i) {
      for (std::size_t k = 0; k < dim; ++k) start[k] += ritz(static_cast<Eigen::Index>(i)) * basis[i][k];
    }
    const double inv = 1.0 / std::sqrt(norm_sq(start));
    for (auto& a : start) a *= inv;
    if (residual < tol) break;
  }

  const auto hz = kernels::apply_hamiltonian(h, start);
  const double e = dot(start, hz).real();
  double r2 = 0.0;
  for (std::size_t k = 0; k < dim; ++k) r2 += std::norm(hz[k] - e * start[k]);
  if (std::sqrt(r2) > 1e-9 * std::max(1.0, scale)) {
    throw NumericalError("Lanczos ground state did not converge (residual " + std::to_string(std::sqrt(r2)) + ")");
  }
  return {e, StateVector::normalized(h.num_qubits(), std::move(start))};
}

GroundState ground_state(const PauliHamiltonian& h) {
  if (h.num_qubits() > kMaxDenseQubits) {
    throw Error("ground_state: " + std::to_string(h.num_qubits()) + " qubits exceeds the limit of " +
                std::to_string(kMaxDenseQubits));
  }
  return h.num_qubits() <= kMaxFullDiagonalizationQubits ? dense_ground_state(h) : lanczos_ground_state(h);
}

PauliMoments pauli_moments(const StateVector& state, const PauliHamiltonian& h) {
  if (state.num_qubits() != h.num_qubits()) throw Error("pauli_moments: state and Hamiltonian qubit counts differ");
  std::vector<PauliString> strings;
  strings.reserve(h.size());
  for (const auto& t : h.terms()) strings.push_back(t.string);
  const auto ev = kernels::pauli_expectations(state.amplitudes(), strings);
  PauliMoments m;
  m.mu.reserve(ev.size());
  for (std::size_t i = 0; i < ev.size(); ++i) {
    if (std::abs(ev[i].imag()) > 1e-10) throw Error("term " + std::to_string(i) + " has a complex expectation");
    const double mu = std::clamp(ev[i].real(), -1.0, 1.0);
    m.mu.push_back(mu);
    m.p.push_back((1.0 + mu) / 2.0);
    m.q.push_back((1.0 + mu * mu) / 2.0);
  }
  return m;
}

JointProbs joint_probs_doubled(double mu_i, double mu_j, Complex product_expectation) {
  const double cross = (product_expectation * product_expectation).real();
  const double a = mu_i * mu_i;
  const double b = mu_j * mu_j;
  JointProbs q = {(1.0 + a + b + cross) / 4.0, (1.0 + a - b - cross) / 4.0, (1.0 - a + b - cross) / 4.0,
                  (1.0 - a - b + cross) / 4.0};
  for (auto& v : q) v = std::clamp(v, 0.0, 1.0);
  return q;
}

JointProbs joint_probs_doubled(const StateVector& state, const PauliString& pi, const PauliString& pj) {
  check_same(state, pi);
  check_same(state, pj);
  const auto prod = multiply(pi, pj);
  const Complex pij = std::pow(Complex{0.0, 1.0}, prod.phase) * expectation_complex(state, prod.string);
  return joint_probs_doubled(expectation(state, pi), expectation(state, pj), pij);
}

JointProbs joint_probs_single(double mu_i, double mu_j, double product_expectation) {
  JointProbs p = {(1.0 + mu_i + mu_j + product_expectation) / 4.0, (1.0 + mu_i - mu_j - product_expectation) / 4.0,
                  (1.0 - mu_i + mu_j - product_expectation) / 4.0, (1.0 - mu_i - mu_j + product_expectation) / 4.0};
  for (auto& v : p) v = std::clamp(v, 0.0, 1.0);
  return p;
}

JointProbs joint_probs_single(const StateVector& state, const PauliString& pi, const PauliString& pj) {
  check_same(state, pi);
  check_same(state, pj);
  if (!qubit_wise_commutes(pi, pj)) throw Error("joint_probs_single: strings are not qubit-wise commuting");
  const auto prod = multiply(pi, pj);
  return joint_probs_single(expectation(state, pi), expectation(state, pj), expectation(state, prod.string));
}

}  // namespace bellsample
