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

#include "bellsample/kernels.hpp"

#include <bit>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bellsample/error.hpp"

namespace bellsample {

namespace {

Complex i_power(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

double parity_sign(std::uint64_t bits) { return (std::popcount(bits) & 1) ? -1.0 : 1.0; }

std::size_t checked_dimension(const PauliHamiltonian& h) {
  if (h.num_qubits() > kMaxDenseQubits) {
    throw Error("dense matrix for " + std::to_string(h.num_qubits()) + " qubits exceeds the " +
                std::to_string(kMaxDenseQubits) + "-qubit limit");
  }
  return std::size_t{1} << h.num_qubits();
}

void fill_column(const PauliHamiltonian& h, std::size_t dim, std::size_t x, Complex* column_major) {
  column_major[x * dim + x] += h.constant();
  for (const auto& t : h.terms()) {
    const auto& p = t.string;
    const std::size_t row = x ^ p.x_mask();
    column_major[x * dim + row] += t.coefficient * i_power(p.num_y()) * parity_sign(x & p.z_mask());
  }
}

void fill_column_real(const PauliHamiltonian& h, std::size_t dim, std::size_t x, double* column_major) {
  column_major[x * dim + x] += h.constant();
  for (const auto& t : h.terms()) {
    const auto& p = t.string;
    const std::size_t row = x ^ p.x_mask();
    const double phase = (p.num_y() % 4 == 2) ? -1.0 : 1.0;
    column_major[x * dim + row] += t.coefficient * phase * parity_sign(x & p.z_mask());
  }
}

Complex expectation_of(std::span<const Complex> psi, const PauliString& p) {
  Complex acc = 0.0;
  const std::uint64_t xm = p.x_mask();
  const std::uint64_t zm = p.z_mask();
  for (std::size_t x = 0; x < psi.size(); ++x) {
    acc += std::conj(psi[x ^ xm]) * psi[x] * parity_sign(x & zm);
  }
  return acc * i_power(p.num_y());
}

Complex product_expectation(std::span<const Complex> psi, const PauliString& a, const PauliString& b) {
  const auto prod = multiply(a, b);
  return i_power(prod.phase) * expectation_of(psi, prod.string);
}

std::int64_t lambda_sum_of(std::span<const std::uint64_t> flips, std::span<const std::uint64_t> phases,
                           std::span<const std::int64_t> counts, const PauliString& p) {
  std::int64_t acc = 0;
  const std::uint64_t xm = p.x_mask();
  const std::uint64_t zm = p.z_mask();
  const int y = p.num_y() & 1;
  for (std::size_t t = 0; t < counts.size(); ++t) {
    const int odd = (std::popcount(phases[t] & xm) + std::popcount(flips[t] & zm) + y) & 1;
    acc += odd ? -counts[t] : counts[t];
  }
  return acc;
}

struct RowTerm {
  std::uint64_t x = 0;
  std::uint64_t z = 0;
  Complex factor;
};

std::vector<RowTerm> row_terms(const PauliHamiltonian& h, std::size_t size) {
  if (size != (std::size_t{1} << h.num_qubits())) throw Error("apply_hamiltonian: vector length does not match the qubit count");
  std::vector<RowTerm> out;
  out.reserve(h.size());
  for (const auto& t : h.terms()) {
    out.push_back({t.string.x_mask(), t.string.z_mask(), t.coefficient * i_power(t.string.num_y())});
  }
  return out;
}

// <r|H|psi>: P|y> = i^{#Y} (-1)^{|y & z|} |y ^ x> with y = r ^ x.
Complex apply_row(const std::vector<RowTerm>& terms, double constant, std::span<const Complex> psi, std::size_t r) {
  Complex acc = constant * psi[r];
  for (const auto& t : terms) {
    const std::size_t y = r ^ t.x;
    acc += t.factor * parity_sign(y & t.z) * psi[y];
  }
  return acc;
}

void check_power_of_two(std::size_t n) {
  if (n == 0 || (n & (n - 1)) != 0) throw Error("walsh_hadamard: length must be a power of two");
}

}  // namespace

int worker_count() {
  if (const char* env = std::getenv("BELLSAMPLE_NUM_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void configure_workers_from_env() {
#ifdef _OPENMP
  if (std::getenv("BELLSAMPLE_NUM_THREADS")) omp_set_num_threads(worker_count());
#endif
}

namespace kernels {

std::vector<Complex> dense_matrix(const PauliHamiltonian& h) {
  const std::size_t dim = checked_dimension(h);
  std::vector<Complex> m(dim * dim, Complex{0.0, 0.0});
  const auto d = static_cast<std::int64_t>(dim);
#pragma omp parallel for schedule(static)
  for (std::int64_t x = 0; x < d; ++x) fill_column(h, dim, static_cast<std::size_t>(x), m.data());
  return m;
}

std::vector<double> dense_matrix_real(const PauliHamiltonian& h) {
  const std::size_t dim = checked_dimension(h);
  std::vector<double> m(dim * dim, 0.0);
  const auto d = static_cast<std::int64_t>(dim);
#pragma omp parallel for schedule(static)
  for (std::int64_t x = 0; x < d; ++x) fill_column_real(h, dim, static_cast<std::size_t>(x), m.data());
  return m;
}

std::vector<Complex> apply_hamiltonian(const PauliHamiltonian& h, std::span<const Complex> psi) {
  const auto terms = row_terms(h, psi.size());
  std::vector<Complex> out(psi.size());
  const auto d = static_cast<std::int64_t>(psi.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < d; ++r) out[r] = apply_row(terms, h.constant(), psi, static_cast<std::size_t>(r));
  return out;
}

std::vector<Complex> pauli_expectations(std::span<const Complex> psi, std::span<const PauliString> strings) {
  std::vector<Complex> out(strings.size());
  const auto m = static_cast<std::int64_t>(strings.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t k = 0; k < m; ++k) out[k] = expectation_of(psi, strings[k]);
  return out;
}

std::vector<Complex> pair_products(std::span<const Complex> psi, std::span<const PauliString> strings) {
  std::vector<Complex> out(pair_count(strings.size()));
  for_each_pair(strings.size(), [&](std::size_t i, std::size_t j, std::size_t k) {
    out[k] = product_expectation(psi, strings[i], strings[j]);
  });
  return out;
}

void walsh_hadamard(std::span<Complex> v) {
  check_power_of_two(v.size());
  const auto n = static_cast<std::int64_t>(v.size());
  for (int level = 0; (std::int64_t{1} << level) < n; ++level) {
    const std::int64_t h = std::int64_t{1} << level;
    // Butterfly index t enumerates pairs (lo, lo + h) with bit h of lo clear.
#pragma omp parallel for schedule(static) if (n >= (1 << 14))
    for (std::int64_t t = 0; t < n / 2; ++t) {
      const std::int64_t lo = ((t >> level) << (level + 1)) | (t & (h - 1));
      const Complex a = v[lo];
      const Complex b = v[lo + h];
      v[lo] = a + b;
      v[lo + h] = a - b;
    }
  }
}

std::vector<std::int64_t> lambda_sums(std::span<const std::uint64_t> flips, std::span<const std::uint64_t> phases,
                                      std::span<const std::int64_t> counts, std::span<const PauliTerm> terms) {
  std::vector<std::int64_t> out(terms.size());
  const auto m = static_cast<std::int64_t>(terms.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t k = 0; k < m; ++k) out[k] = lambda_sum_of(flips, phases, counts, terms[k].string);
  return out;
}

namespace serial {

std::vector<Complex> dense_matrix(const PauliHamiltonian& h) {
  const std::size_t dim = checked_dimension(h);
  std::vector<Complex> m(dim * dim, Complex{0.0, 0.0});
  for (std::size_t x = 0; x < dim; ++x) fill_column(h, dim, x, m.data());
  return m;
}

std::vector<double> dense_matrix_real(const PauliHamiltonian& h) {
  const std::size_t dim = checked_dimension(h);
  std::vector<double> m(dim * dim, 0.0);
  for (std::size_t x = 0; x < dim; ++x) fill_column_real(h, dim, x, m.data());
  return m;
}

std::vector<Complex> apply_hamiltonian(const PauliHamiltonian& h, std::span<const Complex> psi) {
  const auto terms = row_terms(h, psi.size());
  std::vector<Complex> out(psi.size());
  for (std::size_t r = 0; r < psi.size(); ++r) out[r] = apply_row(terms, h.constant(), psi, r);
  return out;
}

std::vector<Complex> pauli_expectations(std::span<const Complex> psi, std::span<const PauliString> strings) {
  std::vector<Complex> out;
  out.reserve(strings.size());
  for (const auto& p : strings) out.push_back(expectation_of(psi, p));
  return out;
}

std::vector<Complex> pair_products(std::span<const Complex> psi, std::span<const PauliString> strings) {
  std::vector<Complex> out(pair_count(strings.size()));
  for_each_pair(strings.size(), [&](std::size_t i, std::size_t j, std::size_t k) {
    out[k] = product_expectation(psi, strings[i], strings[j]);
  });
  return out;
}

void walsh_hadamard(std::span<Complex> v) {
  check_power_of_two(v.size());
  for (std::size_t h = 1; h < v.size(); h <<= 1) {
    for (std::size_t lo = 0; lo < v.size(); lo += 2 * h) {
      for (std::size_t k = lo; k < lo + h; ++k) {
        const Complex a = v[k];
        const Complex b = v[k + h];
        v[k] = a + b;
        v[k + h] = a - b;
      }
    }
  }
}

std::vector<std::int64_t> lambda_sums(std::span<const std::uint64_t> flips, std::span<const std::uint64_t> phases,
                                      std::span<const std::int64_t> counts, std::span<const PauliTerm> terms) {
  std::vector<std::int64_t> out;
  out.reserve(terms.size());
  for (const auto& t : terms) out.push_back(lambda_sum_of(flips, phases, counts, t.string));
  return out;
}

}  // namespace serial
}  // namespace kernels
}  // namespace bellsample
