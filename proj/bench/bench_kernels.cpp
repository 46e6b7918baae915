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

// Serial reference loops against their OpenMP counterparts on the bundled
// fixtures. Worker count follows BELLSAMPLE_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "bellsample/bell_sampler.hpp"
#include "bellsample/kernels.hpp"
#include "bellsample/pauli.hpp"
#include "bellsample/state.hpp"

using namespace bellsample;

namespace {

std::string data_file(const char* name) { return std::string(BELLSAMPLE_DATA_DIR) + "/" + name; }

struct Fixture {
  PauliHamiltonian h;
  StateVector state;
  std::vector<PauliString> strings;
};

const Fixture& fixture(const char* name) {
  static std::vector<std::pair<std::string, Fixture>> cache;
  for (const auto& [k, f] : cache)
    if (k == name) return f;
  Fixture f;
  f.h = load_hamiltonian(data_file(name));
  f.state = ground_state(f.h).state;
  for (const auto& t : f.h.terms()) f.strings.push_back(t.string);
  cache.emplace_back(name, std::move(f));
  return cache.back().second;
}

const char* file_of(int i) { return i == 0 ? "h4.ham" : "lih.ham"; }

template <bool Parallel>
void BM_pair_products(benchmark::State& st) {
  const auto& f = fixture(file_of(static_cast<int>(st.range(0))));
  for (auto _ : st) {
    auto v = Parallel ? kernels::pair_products(f.state.amplitudes(), f.strings)
                      : kernels::serial::pair_products(f.state.amplitudes(), f.strings);
    benchmark::DoNotOptimize(v.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(kernels::pair_count(f.strings.size())));
}

template <bool Parallel>
void BM_pauli_expectations(benchmark::State& st) {
  const auto& f = fixture(file_of(static_cast<int>(st.range(0))));
  for (auto _ : st) {
    auto v = Parallel ? kernels::pauli_expectations(f.state.amplitudes(), f.strings)
                      : kernels::serial::pauli_expectations(f.state.amplitudes(), f.strings);
    benchmark::DoNotOptimize(v.data());
  }
}

template <bool Parallel>
void BM_apply_hamiltonian(benchmark::State& st) {
  const auto& f = fixture(file_of(static_cast<int>(st.range(0))));
  for (auto _ : st) {
    auto v = Parallel ? kernels::apply_hamiltonian(f.h, f.state.amplitudes())
                      : kernels::serial::apply_hamiltonian(f.h, f.state.amplitudes());
    benchmark::DoNotOptimize(v.data());
  }
}

template <bool Parallel>
void BM_lambda_sums(benchmark::State& st) {
  const auto& f = fixture(file_of(static_cast<int>(st.range(0))));
  const auto counts = BellDistribution(f.state).sample(100000, 1);
  for (auto _ : st) {
    auto v = Parallel ? kernels::lambda_sums(counts.flips, counts.phases, counts.counts, f.h.terms())
                      : kernels::serial::lambda_sums(counts.flips, counts.phases, counts.counts, f.h.terms());
    benchmark::DoNotOptimize(v.data());
  }
}

template <bool Parallel>
void BM_walsh_hadamard(benchmark::State& st) {
  std::vector<Complex> v(std::size_t{1} << st.range(0), Complex(1.0, 0.5));
  for (auto _ : st) {
    Parallel ? kernels::walsh_hadamard(v) : kernels::serial::walsh_hadamard(v);
    benchmark::DoNotOptimize(v.data());
  }
}

template <bool Parallel>
void BM_dense_matrix_real(benchmark::State& st) {
  const auto& f = fixture("h4.ham");
  for (auto _ : st) {
    auto m = Parallel ? kernels::dense_matrix_real(f.h) : kernels::serial::dense_matrix_real(f.h);
    benchmark::DoNotOptimize(m.data());
  }
}

}  // namespace

BENCHMARK(BM_pair_products<false>)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pair_products<true>)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pauli_expectations<false>)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_pauli_expectations<true>)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_apply_hamiltonian<false>)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_apply_hamiltonian<true>)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_lambda_sums<false>)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_lambda_sums<true>)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_walsh_hadamard<false>)->Arg(12)->Arg(18)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_walsh_hadamard<true>)->Arg(12)->Arg(18)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_dense_matrix_real<false>)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_dense_matrix_real<true>)->Unit(benchmark::kMicrosecond);

int main(int argc, char** argv) {
  configure_workers_from_env();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
