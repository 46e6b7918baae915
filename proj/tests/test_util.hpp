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

// Reference constructions shared by the unit tests. Everything here is
// written the slow, obvious way (Kronecker products, explicit doubled
// states) so it can serve as an oracle for the library's bit-level code.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "bellsample/pauli.hpp"
#include "bellsample/state.hpp"

namespace testutil {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

inline CMat letter_matrix(bellsample::PauliLetter l) {
  CMat m(2, 2);
  const Complex i(0.0, 1.0);
  switch (l) {
    case bellsample::PauliLetter::I: m << 1, 0, 0, 1; break;
    case bellsample::PauliLetter::X: m << 0, 1, 1, 0; break;
    case bellsample::PauliLetter::Y: m << 0, -i, i, 0; break;
    case bellsample::PauliLetter::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

inline CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
  return out;
}

/// Dense matrix of p with basis index bit k = qubit k (qubit n-1 is the
/// leftmost Kronecker factor).
inline CMat pauli_matrix(const bellsample::PauliString& p) {
  CMat m = CMat::Identity(1, 1);
  for (int k = p.num_qubits() - 1; k >= 0; --k) m = kron(m, letter_matrix(p.letter(k)));
  return m;
}

inline CMat hamiltonian_matrix(const bellsample::PauliHamiltonian& h) {
  const Eigen::Index dim = Eigen::Index{1} << h.num_qubits();
  CMat m = h.constant() * CMat::Identity(dim, dim);
  for (const auto& t : h.terms()) m += t.coefficient * pauli_matrix(t.string);
  return m;
}

inline CVec to_eigen(const bellsample::StateVector& s) {
  CVec v(static_cast<Eigen::Index>(s.dimension()));
  for (std::size_t i = 0; i < s.dimension(); ++i) v(static_cast<Eigen::Index>(i)) = s[i];
  return v;
}

inline bellsample::StateVector random_state(int n, std::mt19937_64& gen) {
  std::normal_distribution<double> g;
  std::vector<Complex> amp(std::size_t{1} << n);
  for (auto& a : amp) a = {g(gen), g(gen)};
  return bellsample::StateVector::normalized(n, std::move(amp));
}

inline bellsample::PauliString random_string(int n, std::mt19937_64& gen) {
  std::uniform_int_distribution<int> d(0, 3);
  bellsample::PauliString p(n);
  for (int k = 0; k < n; ++k) p.set_letter(k, static_cast<bellsample::PauliLetter>(d(gen)));
  return p;
}

/// All 4^n strings on n qubits.
inline std::vector<bellsample::PauliString> all_strings(int n) {
  std::vector<bellsample::PauliString> out;
  const std::uint64_t full = (std::uint64_t{1} << n) - 1;
  for (std::uint64_t x = 0; x <= full; ++x)
    for (std::uint64_t z = 0; z <= full; ++z) out.emplace_back(n, x, z);
  return out;
}

/**
 * Bell-outcome distribution of |psi>|psi> computed on the explicit 2n-qubit
 * state: pair k couples qubit k of copy 1 and copy 2, and each outcome
 * probability is |<B_{a,b}|psi psi>|^2 with B a tensor product of the four
 * Bell vectors. Index a * 2^n + b with a the flip word, b the phase word.
 */
inline std::vector<double> doubled_state_bell_distribution(const bellsample::StateVector& s) {
  const int n = s.num_qubits();
  const std::size_t dim = s.dimension();
  const double r = 1.0 / std::sqrt(2.0);
  // bell[a][b] as amplitudes over (copy1 bit, copy2 bit) = 00, 01, 10, 11.
  const double bell[2][2][4] = {{{r, 0, 0, r}, {r, 0, 0, -r}}, {{0, r, r, 0}, {0, r, -r, 0}}};
  std::vector<double> out(dim * dim, 0.0);
  for (std::size_t a = 0; a < dim; ++a) {
    for (std::size_t b = 0; b < dim; ++b) {
      Complex amp = 0.0;
      for (std::size_t x1 = 0; x1 < dim; ++x1) {
        for (std::size_t x2 = 0; x2 < dim; ++x2) {
          double w = 1.0;
          for (int k = 0; k < n && w != 0.0; ++k) {
            const int u = static_cast<int>((x1 >> k) & 1U);
            const int v = static_cast<int>((x2 >> k) & 1U);
            w *= bell[(a >> k) & 1U][(b >> k) & 1U][2 * u + v];
          }
          amp += w * s[x1] * s[x2];
        }
      }
      out[a * dim + b] = std::norm(amp);
    }
  }
  return out;
}

}  // namespace testutil
