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
 * Pauli strings in symplectic (x-mask, z-mask) form, weighted Pauli
 * Hamiltonians, their text format, and qubit-wise commuting grouping.
 */

#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bellsample {

enum class PauliLetter : std::uint8_t { I = 0, X = 1, Z = 2, Y = 3 };

char to_char(PauliLetter letter);

/**
 * An n-qubit tensor product over {I,X,Y,Z}. Bit k of the x-mask is set for
 * X and Y on qubit k, bit k of the z-mask for Z and Y. Up to 64 qubits.
 *
 * As an operator, P = i^{#Y} X^x Z^z, so P|b> = i^{#Y} (-1)^{|b & z|}
 * |b ^ x> on computational basis states.
 */
class PauliString {
 public:
  static constexpr int kMaxQubits = 64;

  PauliString() = default;
  /// Identity on n qubits.
  explicit PauliString(int n);
  PauliString(int n, std::uint64_t x_mask, std::uint64_t z_mask);

  /// Parses a dense word such as "XIZY" (character k is qubit k).
  static PauliString from_word(std::string_view word);

  int num_qubits() const noexcept { return n_; }
  std::uint64_t x_mask() const noexcept { return x_; }
  std::uint64_t z_mask() const noexcept { return z_; }

  PauliLetter letter(int k) const;
  void set_letter(int k, PauliLetter letter);

  bool is_identity() const noexcept { return (x_ | z_) == 0; }
  int weight() const noexcept { return std::popcount(x_ | z_); }
  int num_y() const noexcept { return std::popcount(x_ & z_); }

  /// Dense word, character k for qubit k.
  std::string word() const;
  /// Factor list in the Hamiltonian file syntax, e.g. "X0 Z2"; empty for I.
  std::string factors() const;

  friend bool operator==(const PauliString&, const PauliString&) = default;
  /// Canonical order: lexicographic on (x-mask, z-mask).
  friend bool operator<(const PauliString& a, const PauliString& b) {
    return a.x_ != b.x_ ? a.x_ < b.x_ : a.z_ < b.z_;
  }

 private:
  int n_ = 0;
  std::uint64_t x_ = 0;
  std::uint64_t z_ = 0;
};

/// Letter at position k (the per-pair factor sigma_k of P (x) P).
PauliLetter single_pair_letters(const PauliString& p, int k);

/// True iff at every qubit the letters agree or one of them is I.
bool qubit_wise_commutes(const PauliString& p, const PauliString& q);

/// True iff p and q commute as operators.
bool commutes(const PauliString& p, const PauliString& q);

/// Operator product p*q = i^phase * r, phase in {0,1,2,3}.
struct PauliProduct {
  int phase = 0;
  PauliString string;
};
PauliProduct multiply(const PauliString& p, const PauliString& q);

struct PauliTerm {
  double coefficient = 0.0;
  PauliString string;
};

/**
 * H = constant * I + sum_i c_i P_i with distinct non-identity P_i stored in
 * canonical order.
 */
class PauliHamiltonian {
 public:
  PauliHamiltonian() = default;
  /// Merges duplicates, drops identity strings into the constant, sorts.
  PauliHamiltonian(int n, std::vector<PauliTerm> terms, double constant = 0.0);

  int num_qubits() const noexcept { return n_; }
  std::size_t size() const noexcept { return terms_.size(); }
  std::span<const PauliTerm> terms() const noexcept { return terms_; }
  const PauliTerm& term(std::size_t i) const { return terms_.at(i); }
  double constant() const noexcept { return constant_; }

  /// Sum of |c_i| over non-identity terms.
  double l1_norm() const;
  /// True if every string has an even number of Y letters, in which case the
  /// matrix in the computational basis is real.
  bool is_real() const;

 private:
  int n_ = 0;
  std::vector<PauliTerm> terms_;
  double constant_ = 0.0;
};

/**
 * Parses the line-oriented Hamiltonian format:
 *
 *     # comment
 *     qubits 4
 *     -0.0988
 *     0.1712 Z0
 *     -0.4804 Z0 Z1
 *
 * A line holding only a coefficient contributes to the constant term.
 * Throws ParseError with the offending line number.
 */
PauliHamiltonian parse_hamiltonian(std::string_view text);
PauliHamiltonian load_hamiltonian(const std::filesystem::path& path);

/// Canonical text form; parse_hamiltonian(serialize(h)) reproduces h.
std::string serialize(const PauliHamiltonian& h);

/// Parses a factor list such as "X0 Z3" on n qubits (used by the sign-oracle
/// format as well).
PauliString parse_factors(std::span<const std::string_view> factors, int n, std::size_t line);

/**
 * Partition of the non-identity terms into qubit-wise commuting groups.
 * weights[g] = sum_{i in g} |c_i| / sum_i |c_i|.
 */
struct Grouping {
  std::vector<std::vector<std::size_t>> groups;
  std::vector<double> weights;
  /// group_of[i] is the group holding term i.
  std::vector<std::size_t> group_of;

  std::size_t size() const noexcept { return groups.size(); }
};

/**
 * Greedy sequential colouring of the QWC-incompatibility graph, visiting
 * terms by descending |c_i| (stable on canonical order); each term joins the
 * first group it is compatible with. Requires at least one term.
 */
Grouping qwc_grouping(const PauliHamiltonian& h);

/// Checks the Grouping invariants against h; returns an empty string when
/// valid, otherwise a description of the first violation.
std::string validate_grouping(const PauliHamiltonian& h, const Grouping& g);

}  // namespace bellsample
