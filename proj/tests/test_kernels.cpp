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

#include <doctest.h>
#include <omp.h>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "bellsample/kernels.hpp"
#include "bellsample/pauli.hpp"
#include "bellsample/state.hpp"
#include "test_util.hpp"

using namespace bellsample;

namespace {

std::string data_file(const char* name) { return std::string(BELLSAMPLE_DATA_DIR) + "/" + name; }

PauliHamiltonian random_hamiltonian(int n, int terms, std::mt19937_64& gen) {
  std::normal_distribution<double> c;
  std::vector<PauliTerm> t;
  for (int k = 0; k < terms; ++k) t.push_back({c(gen), testutil::random_string(n, gen)});
  return PauliHamiltonian(n, std::move(t), c(gen));
}

std::vector<PauliString> strings_of(const PauliHamiltonian& h) {
  std::vector<PauliString> out;
  for (const auto& t : h.terms()) out.push_back(t.string);
  return out;
}

// Runs f with several OpenMP workers even on a single-core host.
template <class F>
void with_workers(int w, F f) {
  const int before = omp_get_max_threads();
  omp_set_num_threads(w);
  f();
  omp_set_num_threads(before);
}

// <B|sigma (x) sigma|B> for the Bell vector with flip bit a and phase bit b.
double bell_eigenvalue(PauliLetter l, int a, int b) {
  const double r = 1.0 / std::sqrt(2.0);
  testutil::CVec v = testutil::CVec::Zero(4);
  if (a == 0) {
    v(0) = r;
    v(3) = b == 0 ? r : -r;
  } else {
    v(1) = r;
    v(2) = b == 0 ? r : -r;
  }
  const auto s = testutil::letter_matrix(l);
  return (v.adjoint() * testutil::kron(s, s) * v)(0).real();
}

}  // namespace

TEST_CASE("dense matrices against Kronecker products") {
  std::mt19937_64 gen(3);
  for (int n : {1, 2, 4, 6}) {
    const auto h = random_hamiltonian(n, 3 * n, gen);
    const auto ref = testutil::hamiltonian_matrix(h);
    const std::size_t dim = std::size_t{1} << n;
    std::vector<Complex> par;
    with_workers(4, [&] { par = kernels::dense_matrix(h); });
    const auto ser = kernels::serial::dense_matrix(h);
    REQUIRE(par.size() == dim * dim);
    CHECK(par == ser);
    double err = 0.0;
    for (std::size_t c = 0; c < dim; ++c)
      for (std::size_t r = 0; r < dim; ++r)
        err = std::max(err, std::abs(par[c * dim + r] - ref(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))));
    CHECK(err < 1e-12);
  }
  const auto h2 = load_hamiltonian(data_file("h2.ham"));
  REQUIRE(h2.is_real());
  std::vector<double> par;
  with_workers(3, [&] { par = kernels::dense_matrix_real(h2); });
  CHECK(par == kernels::serial::dense_matrix_real(h2));
  const auto cplx = kernels::serial::dense_matrix(h2);
  for (std::size_t k = 0; k < cplx.size(); ++k) {
    CHECK(std::abs(cplx[k].imag()) < 1e-15);
    CHECK(par[k] == doctest::Approx(cplx[k].real()).epsilon(1e-15));
  }
}

TEST_CASE("matrix-free Hamiltonian product") {
  std::mt19937_64 gen(5);
  for (int n : {1, 3, 5, 7}) {
    const auto h = random_hamiltonian(n, 4 * n, gen);
    const auto s = testutil::random_state(n, gen);
    const testutil::CVec ref = testutil::hamiltonian_matrix(h) * testutil::to_eigen(s);
    std::vector<Complex> par;
    with_workers(4, [&] { par = kernels::apply_hamiltonian(h, s.amplitudes()); });
    CHECK(par == kernels::serial::apply_hamiltonian(h, s.amplitudes()));
    double err = 0.0;
    for (std::size_t k = 0; k < par.size(); ++k) err = std::max(err, std::abs(par[k] - ref(static_cast<Eigen::Index>(k))));
    CHECK(err < 1e-12);
  }
}

TEST_CASE("expectations and pair products") {
  std::mt19937_64 gen(7);
  const int n = 4;
  const auto s = testutil::random_state(n, gen);
  const auto psi = testutil::to_eigen(s);
  std::vector<PauliString> strings;
  for (int k = 0; k < 25; ++k) strings.push_back(testutil::random_string(n, gen));

  std::vector<Complex> ev;
  std::vector<Complex> pp;
  with_workers(4, [&] {
    ev = kernels::pauli_expectations(s.amplitudes(), strings);
    pp = kernels::pair_products(s.amplitudes(), strings);
  });
  CHECK(ev == kernels::serial::pauli_expectations(s.amplitudes(), strings));
  CHECK(pp == kernels::serial::pair_products(s.amplitudes(), strings));
  REQUIRE(pp.size() == kernels::pair_count(strings.size()));

  for (std::size_t i = 0; i < strings.size(); ++i) {
    const Complex ref = (psi.adjoint() * testutil::pauli_matrix(strings[i]) * psi)(0);
    CHECK(std::abs(ev[i] - ref) < 1e-12);
  }
  std::size_t k = 0;
  for (std::size_t i = 0; i < strings.size(); ++i) {
    for (std::size_t j = i + 1; j < strings.size(); ++j, ++k) {
      const Complex ref = (psi.adjoint() * testutil::pauli_matrix(strings[i]) * testutil::pauli_matrix(strings[j]) * psi)(0);
      CHECK(std::abs(pp[k] - ref) < 1e-12);
    }
  }
}

TEST_CASE("Walsh-Hadamard transform") {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> g;
  for (int n : {0, 1, 3, 8}) {
    const std::size_t dim = std::size_t{1} << n;
    std::vector<Complex> v(dim);
    for (auto& a : v) a = {g(gen), g(gen)};
    std::vector<Complex> ref(dim, 0.0);
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c = 0; c < dim; ++c) ref[r] += (std::popcount(r & c) % 2 ? -1.0 : 1.0) * v[c];
    auto par = v;
    auto ser = v;
    with_workers(4, [&] { kernels::walsh_hadamard(par); });
    kernels::serial::walsh_hadamard(ser);
    CHECK(par == ser);
    double err = 0.0;
    for (std::size_t k = 0; k < dim; ++k) err = std::max(err, std::abs(par[k] - ref[k]));
    CHECK(err < 1e-11 * static_cast<double>(dim));
  }
  {
    std::vector<Complex> v(std::size_t{1} << 15);
    for (auto& a : v) a = {g(gen), g(gen)};
    auto par = v;
    with_workers(4, [&] { kernels::walsh_hadamard(par); });
    kernels::serial::walsh_hadamard(v);
    CHECK(par == v);
  }
  std::vector<Complex> bad(6);
  CHECK_THROWS(kernels::walsh_hadamard(bad));
}

TEST_CASE("lambda sums against per-pair Bell eigenvalues") {
  std::mt19937_64 gen(13);
  const int n = 5;
  const std::size_t dim = std::size_t{1} << n;
  std::vector<PauliTerm> terms;
  for (int k = 0; k < 30; ++k) terms.push_back({1.0, testutil::random_string(n, gen)});
  std::uniform_int_distribution<std::uint64_t> word(0, dim - 1);
  std::uniform_int_distribution<std::int64_t> cnt(1, 50);
  std::vector<std::uint64_t> flips;
  std::vector<std::uint64_t> phases;
  std::vector<std::int64_t> counts;
  for (int r = 0; r < 200; ++r) {
    flips.push_back(word(gen));
    phases.push_back(word(gen));
    counts.push_back(cnt(gen));
  }
  std::vector<std::int64_t> par;
  with_workers(4, [&] { par = kernels::lambda_sums(flips, phases, counts, terms); });
  CHECK(par == kernels::serial::lambda_sums(flips, phases, counts, terms));
  for (std::size_t t = 0; t < terms.size(); ++t) {
    double ref = 0.0;
    for (std::size_t r = 0; r < flips.size(); ++r) {
      double lam = 1.0;
      for (int k = 0; k < n; ++k)
        lam *= bell_eigenvalue(terms[t].string.letter(k), static_cast<int>((flips[r] >> k) & 1U),
                               static_cast<int>((phases[r] >> k) & 1U));
      ref += lam * static_cast<double>(counts[r]);
    }
    CHECK(static_cast<double>(par[t]) == doctest::Approx(ref));
  }
}

TEST_CASE("pair iteration") {
  for (std::size_t m : {0, 1, 2, 7, 40}) {
    std::vector<std::pair<std::size_t, std::size_t>> ser;
    kernels::serial::for_each_pair(m, [&](std::size_t i, std::size_t j, std::size_t k) {
      CHECK(k == ser.size());
      ser.emplace_back(i, j);
    });
    CHECK(ser.size() == kernels::pair_count(m));
    std::vector<std::pair<std::size_t, std::size_t>> par(kernels::pair_count(m), {0, 0});
    std::atomic<std::size_t> visits{0};
    with_workers(4, [&] {
      kernels::for_each_pair(m, [&](std::size_t i, std::size_t j, std::size_t k) {
        par[k] = {i, j};
        ++visits;
      });
    });
    CHECK(visits.load() == ser.size());
    CHECK(par == ser);
  }
  std::vector<int> seen(100, 0);
  with_workers(4, [&] { kernels::for_each_index(seen.size(), [&](std::size_t i) { seen[i] += 1; }); });
  CHECK(std::count(seen.begin(), seen.end(), 1) == 100);
  with_workers(4, [&] {
    CHECK_THROWS_AS(kernels::for_each_index(50, [](std::size_t i) {
                      if (i == 17) throw std::runtime_error("boom");
                    }),
                    std::runtime_error);
  });
}

TEST_CASE("worker count from the environment") {
  CHECK(worker_count() >= 1);
}
