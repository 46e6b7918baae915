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
 * Data-parallel inner loops. Every kernel in bellsample::kernels is an
 * OpenMP loop; bellsample::kernels::serial holds the plain reference loop
 * it is tested against. Results are written to per-index slots and reduced
 * in index order, so the parallel kernels return bit-identical results for
 * any worker count.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <vector>

#include "bellsample/pauli.hpp"
#include "bellsample/state.hpp"

namespace bellsample {

/// Worker count: BELLSAMPLE_NUM_THREADS if set, otherwise the OpenMP default.
int worker_count();
/// Applies BELLSAMPLE_NUM_THREADS to the OpenMP runtime (no-op when unset).
void configure_workers_from_env();

namespace kernels {

/// Collects the first exception thrown inside a parallel region.
class ExceptionSlot {
 public:
  template <class F>
  void run(F&& f) noexcept {
    try {
      f();
    } catch (...) {
      std::lock_guard lock(mu_);
      if (!first_) first_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (first_) std::rethrow_exception(first_);
  }

 private:
  std::mutex mu_;
  std::exception_ptr first_;
};

/// Column-major dense matrix of h (constant on the diagonal), complex form.
std::vector<Complex> dense_matrix(const PauliHamiltonian& h);
/// Real part only; valid when h.is_real().
std::vector<double> dense_matrix_real(const PauliHamiltonian& h);

/// H|psi> row by row, without forming the matrix.
std::vector<Complex> apply_hamiltonian(const PauliHamiltonian& h, std::span<const Complex> psi);

/// <psi|P_k|psi> for every string.
std::vector<Complex> pauli_expectations(std::span<const Complex> psi, std::span<const PauliString> strings);

/// <psi|P_i P_j|psi> for every i < j, in for_each_pair order.
std::vector<Complex> pair_products(std::span<const Complex> psi, std::span<const PauliString> strings);

/// Unnormalized in-place Walsh-Hadamard transform; size must be a power of 2.
void walsh_hadamard(std::span<Complex> v);

/**
 * Sum over recorded Bell words of count * Lambda_P(flip, phase) for each
 * term, where Lambda_P = (-1)^{|phase & x| + |flip & z| + #Y}.
 */
std::vector<std::int64_t> lambda_sums(std::span<const std::uint64_t> flips, std::span<const std::uint64_t> phases,
                                      std::span<const std::int64_t> counts, std::span<const PauliTerm> terms);

/// Calls f(i, j, k) for all i < j < m, k the row-major upper-triangle index.
template <class F>
void for_each_pair(std::size_t m, F&& f) {
  ExceptionSlot slot;
  const auto mm = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t i = 0; i < mm; ++i) {
    slot.run([&] {
      const auto ui = static_cast<std::size_t>(i);
      std::size_t k = ui * m - ui * (ui + 1) / 2;
      for (std::size_t j = ui + 1; j < m; ++j, ++k) f(ui, j, k);
    });
  }
  slot.rethrow();
}

/// Calls f(i) for i < m.
template <class F>
void for_each_index(std::size_t m, F&& f) {
  ExceptionSlot slot;
  const auto mm = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < mm; ++i) {
    slot.run([&] { f(static_cast<std::size_t>(i)); });
  }
  slot.rethrow();
}

/// Number of unordered pairs among m items.
constexpr std::size_t pair_count(std::size_t m) { return m < 2 ? 0 : m * (m - 1) / 2; }

namespace serial {

std::vector<Complex> dense_matrix(const PauliHamiltonian& h);
std::vector<double> dense_matrix_real(const PauliHamiltonian& h);
std::vector<Complex> apply_hamiltonian(const PauliHamiltonian& h, std::span<const Complex> psi);
std::vector<Complex> pauli_expectations(std::span<const Complex> psi, std::span<const PauliString> strings);
std::vector<Complex> pair_products(std::span<const Complex> psi, std::span<const PauliString> strings);
void walsh_hadamard(std::span<Complex> v);
std::vector<std::int64_t> lambda_sums(std::span<const std::uint64_t> flips, std::span<const std::uint64_t> phases,
                                      std::span<const std::int64_t> counts, std::span<const PauliTerm> terms);

template <class F>
void for_each_pair(std::size_t m, F&& f) {
  std::size_t k = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j, ++k) f(i, j, k);
}

}  // namespace serial
}  // namespace kernels
}  // namespace bellsample
