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

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "bellsample/bell_sampler.hpp"
#include "bellsample/error.hpp"
#include "bellsample/kernels.hpp"
#include "bellsample/moments.hpp"
#include "bellsample/rng.hpp"
#include "bellsample/signs.hpp"
#include "bellsample/state.hpp"
#include "test_util.hpp"

using namespace bellsample;

namespace {

std::string data_file(const char* name) { return std::string(BELLSAMPLE_DATA_DIR) + "/" + name; }

double sqrt_est(int m, int n) { return std::sqrt(std::max(0.0, 2.0 * m / n - 1.0)); }
double sign_est(int m, int n) { return 2 * m > n ? 1.0 : (2 * m < n ? -1.0 : 1.0); }

// Moments of f(#plus) over all 2^n outcome sequences.
template <class F>
double enumerate_single(double q, int n, F f) {
  double total = 0.0;
  for (unsigned seq = 0; seq < (1U << n); ++seq) {
    const int m = std::popcount(seq);
    total += std::pow(q, m) * std::pow(1.0 - q, n - m) * f(m, n);
  }
  return total;
}

// E[f(#plus_i) g(#plus_j)] over all 4^n sequences of joint outcomes.
template <class F>
double enumerate_pair(const JointProbs& q, int n, F f) {
  double total = 0.0;
  std::vector<int> cell(static_cast<std::size_t>(n), 0);
  const long cases = 1L << (2 * n);
  for (long c = 0; c < cases; ++c) {
    double w = 1.0;
    int mi = 0;
    int mj = 0;
    for (int s = 0; s < n; ++s) {
      const int k = static_cast<int>((c >> (2 * s)) & 3);
      w *= q[k];
      if (k == 0 || k == 1) ++mi;
      if (k == 0 || k == 2) ++mj;
    }
    total += w * f(mi, mj, n);
  }
  return total;
}

JointProbs random_joint(std::mt19937_64& gen) {
  std::exponential_distribution<double> e(1.0);
  JointProbs q{};
  double s = 0.0;
  for (auto& v : q) s += (v = e(gen));
  for (auto& v : q) v /= s;
  return q;
}

// Simpson quadrature of E[g(X)], X ~ N(mu, sigma^2), over mu +- 12 sigma.
template <class G>
double normal_quadrature(double mu, double sigma, G g, int panels = 200000) {
  const double lo = mu - 12.0 * sigma;
  const double hi = mu + 12.0 * sigma;
  const double h = (hi - lo) / panels;
  double acc = 0.0;
  for (int k = 0; k <= panels; ++k) {
    const double x = lo + k * h;
    const double w = (k == 0 || k == panels) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    acc += w * g(x) * std::exp(-0.5 * (x - mu) * (x - mu) / (sigma * sigma));
  }
  return acc * h / 3.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

TEST_CASE("exact b moments: examples") {
  CHECK(exp_b_exact(1.0, 17) == doctest::Approx(1.0));
  CHECK(exp_b_exact(0.5, 1) == doctest::Approx(0.5));
  CHECK(exp_b_exact(0.5, 2) == doctest::Approx(0.25));
  CHECK(exp_b2_exact(1.0, 9) == doctest::Approx(1.0));
  CHECK(exp_b2_exact(0.5, 2) == doctest::Approx(0.25));
  CHECK(exp_b_exact(0.0, 5) == 0.0);
  CHECK_THROWS_AS(exp_b_exact(1.5, 5), Error);
  CHECK_THROWS_AS(exp_b_exact(0.5, 0), Error);
}

TEST_CASE("exact b moments equal sequence enumeration") {
  for (int n = 1; n <= 12; ++n) {
    for (double q : {0.0, 0.1, 0.5, 0.62, 0.9, 1.0}) {
      const double eb = enumerate_single(q, n, [](int m, int nn) { return sqrt_est(m, nn); });
      const double eb2 = enumerate_single(q, n, [](int m, int nn) { return std::pow(sqrt_est(m, nn), 2); });
      CHECK(exp_b_exact(q, n) == doctest::Approx(eb).epsilon(1e-12));
      CHECK(exp_b2_exact(q, n) == doctest::Approx(eb2).epsilon(1e-12));
    }
  }
}

TEST_CASE("exact b moments at large shot counts stay normalized") {
  // E[b^2] = E[max(0, a)] has the closed form mean of the positive part;
  // at q = 0.7 the negative part is negligible, so E[b^2] = 2q - 1.
  for (std::int64_t n : {1000, 100000, 10000000}) CHECK(exp_b2_exact(0.7, n) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(exp_b_exact(0.7, 10000000) <= std::sqrt(0.4));
}

TEST_CASE("exact pair moments") {
  CHECK(exp_bb_exact({1.0, 0.0, 0.0, 0.0}, 7) == doctest::Approx(1.0));
  for (double q : {0.55, 0.8}) CHECK(exp_bb_exact({q, 0.0, 0.0, 1.0 - q}, 11) == doctest::Approx(exp_b2_exact(q, 11)).epsilon(1e-12));
  const auto bb = [](int mi, int mj, int n) { return sqrt_est(mi, n) * sqrt_est(mj, n); };
  CHECK(exp_bb_exact({0.25, 0.25, 0.25, 0.25}, 4) == doctest::Approx(enumerate_pair({0.25, 0.25, 0.25, 0.25}, 4, bb)).epsilon(1e-12));
  std::mt19937_64 gen(4);
  for (int t = 0; t < 20; ++t) {
    const auto q = random_joint(gen);
    const int n = 1 + t % 6;
    CHECK(exp_bb_exact(q, n) == doctest::Approx(enumerate_pair(q, n, bb)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(exp_bb_exact({0.25, 0.25, 0.25, 0.25}, kExactPairLimit + 1), Error);
  CHECK_THROWS_AS(exp_bb_exact({0.5, 0.25, 0.25, 0.25}, 3), Error);
}

TEST_CASE("sign moments") {
  CHECK(exp_s_exact(1.0, 1) == doctest::Approx(1.0));
  for (int n : {1, 3, 9, 51}) CHECK(exp_s_exact(0.5, n) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(exp_s_exact(0.75, 3) == doctest::Approx(0.6875).epsilon(1e-14));
  CHECK_THROWS_AS(exp_s_exact(0.75, 4), Error);
  CHECK(exp_ss_exact({1.0, 0.0, 0.0, 0.0}, 5) == doctest::Approx(1.0));
  CHECK(exp_ss_exact({0.3, 0.0, 0.0, 0.7}, 7) == doctest::Approx(1.0));
  CHECK(exp_ss_exact({0.5, 0.0, 0.0, 0.5}, 3) == doctest::Approx(1.0));

  const auto ss = [](int mi, int mj, int n) { return sign_est(mi, n) * sign_est(mj, n); };
  std::mt19937_64 gen(8);
  for (int t = 0; t < 15; ++t) {
    const auto p = random_joint(gen);
    const int n = 1 + t % 6;
    const double ref = enumerate_pair(p, n, ss);
    CHECK(sign_pair_mean(p, n) == doctest::Approx(ref).epsilon(1e-12));
    if (n % 2 == 1) CHECK(exp_ss_exact(p, n) == doctest::Approx(ref).epsilon(1e-12));
    const double pi = p[0] + p[1];
    CHECK(sign_mean(pi, n) == doctest::Approx(enumerate_single(pi, n, sign_est)).epsilon(1e-12));
  }
  CHECK(sign_mean(0.1, 0) == 1.0);
  CHECK(sign_pair_mean({0.1, 0.2, 0.3, 0.4}, 0) == 1.0);
}

TEST_CASE("normal-approximation references") {
  for (auto [mu, sigma] : {std::pair{0.0, 0.1}, std::pair{0.3, 0.2}, std::pair{-0.1, 0.05}, std::pair{0.8, 0.01}}) {
    const double eb = normal_quadrature(mu, sigma, [](double x) { return std::sqrt(std::max(0.0, x)); });
    const double eb2 = normal_quadrature(mu, sigma, [](double x) { return std::max(0.0, x); });
    CHECK(normal_exp_b(mu, sigma) == doctest::Approx(eb).epsilon(1e-6));
    CHECK(normal_exp_b2(mu, sigma) == doctest::Approx(eb2).epsilon(1e-8));
  }
  const double c = normal_quadrature(0.0, 1.0, [](double x) { return std::sqrt(std::max(0.0, x)); });
  CHECK(small_mu_constant() == doctest::Approx(c).epsilon(1e-5));
  CHECK(small_mu_constant() == doctest::Approx(0.4111).epsilon(1e-3));
}

TEST_CASE("saddle point for single terms") {
  CHECK(saddle_exp_b(0.5, 0.0) == doctest::Approx(std::sqrt(0.5)));
  CHECK(saddle_exp_b(0.5, 1e-8) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-8));
  CHECK(saddle_exp_b2(0.5, 0.0) == doctest::Approx(0.5));
  CHECK(saddle_exp_b2(0.5, 1e-8) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(saddle_exp_b(-0.2, 0.0) == 0.0);
  CHECK(saddle_exp_b(0.0, 0.01) / std::sqrt(0.01) == doctest::Approx(small_mu_constant()).epsilon(0.05));
  // Small-mu second moment: E[max(0, X)] = sigma / sqrt(2 pi) at mu = 0.
  CHECK(saddle_exp_b2(0.0, 0.01) == doctest::Approx(0.01 / std::sqrt(2.0 * std::numbers::pi)).epsilon(0.05));
  CHECK(saddle_exp_b2(0.0, 0.01) >= saddle_exp_b(0.0, 0.01) * saddle_exp_b(0.0, 0.01));

  for (double q : {0.55, 0.7, 0.9, 0.99}) {
    const auto np = normal_params(q, 10000);
    CHECK(std::abs(saddle_exp_b(np.mu, np.sigma) / exp_b_exact(q, 10000) - 1.0) < 0.01);
    CHECK(std::abs(saddle_exp_b2(np.mu, np.sigma) / exp_b2_exact(q, 10000) - 1.0) < 0.01);
  }
}

TEST_CASE("saddle point for pairs") {
  for (double q : {0.6, 0.9, 0.999}) {
    const auto np = normal_params(q, 5000);
    CHECK(std::abs(saddle_exp_bb({q, 0.0, 0.0, 1.0 - q}, 5000) - saddle_exp_b2(np.mu, np.sigma)) < 1e-10);
  }
  {
    const double qi = 0.9;
    const JointProbs ind{qi * qi, qi * (1 - qi), (1 - qi) * qi, (1 - qi) * (1 - qi)};
    const auto np = normal_params(qi, 10000);
    const double prod = std::pow(saddle_exp_b(np.mu, np.sigma), 2);
    CHECK(std::abs(saddle_exp_bb(ind, 10000) / prod - 1.0) < 0.01);
  }
  CHECK(saddle_exp_bb({1.0, 0.0, 0.0, 0.0}, 100) == doctest::Approx(1.0));
  CHECK(saddle_exp_bb({0.0, 0.5, 0.5, 0.0}, 100) == 0.0);

  std::mt19937_64 gen(31);
  int compared = 0;
  for (int t = 0; t < 200; ++t) {
    const auto s = testutil::random_state(3, gen);
    const auto pi = testutil::random_string(3, gen);
    const auto pj = testutil::random_string(3, gen);
    if (pi.is_identity() || pj.is_identity() || pi == pj) continue;
    const auto q = joint_probs_doubled(s, pi, pj);
    const auto ni = normal_params(q[0] + q[1], 100);
    const auto nj = normal_params(q[0] + q[2], 100);
    const double sep = std::min(ni.mu / ni.sigma, nj.mu / nj.sigma);
    const double exact = exp_bb_exact(q, 100);
    const double err = std::abs(saddle_exp_bb(q, 100) / exact - 1.0);
    if (sep < 2.5) continue;
    CHECK(err < 0.02);
    ++compared;
  }
  CHECK(compared >= 5);
}

TEST_CASE("asymptotic references") {
  const auto big = asymptotic_reference(0.9, 1000000);
  const double s2 = (1.0 - 0.81) / 1e6;
  CHECK(big.large_mu);
  CHECK(big.bias < 0.0);
  CHECK(big.bias == doctest::Approx(-s2 / (8.0 * std::pow(0.9, 1.5))));
  const auto a = asymptotic_reference(0.9, 100000);
  const auto b = asymptotic_reference(0.9, 1000000);
  CHECK(std::log10(a.bias / b.bias) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::log10(a.stddev / b.stddev) == doctest::Approx(0.5).epsilon(1e-4));
  const auto z1 = asymptotic_reference(0.0, 10000);
  const auto z2 = asymptotic_reference(0.0, 1000000);
  CHECK_FALSE(z1.large_mu);
  CHECK(std::log10(z1.stddev / z2.stddev) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(std::log10(z1.bias / z2.bias) == doctest::Approx(0.5).epsilon(1e-9));
  // The large-mu formulas describe the exact moments at large N1 (mu here is
  // <P>^2 = 2q - 1).
  const double q = 0.95;
  const auto pred = asymptotic_reference(2 * q - 1, 1000000);
  const double eb = exp_b_exact(q, 1000000);
  CHECK((eb - std::sqrt(2 * q - 1)) == doctest::Approx(pred.bias).epsilon(0.02));
  CHECK(std::sqrt(exp_b2_exact(q, 1000000) - eb * eb) == doctest::Approx(pred.stddev).epsilon(0.01));
}

TEST_CASE("assembly: deterministic single term") {
  const auto h = parse_hamiltonian("qubits 1\n0.7 Z0\n");
  const auto rep = assemble_bias_variance(h, StateVector::basis(1, 0), SignSource::exact(), {50});
  CHECK(rep.bias == doctest::Approx(0.0));
  CHECK(rep.variance == doctest::Approx(0.0));
}

TEST_CASE("assembly agrees with Monte Carlo on a two-term toy") {
  std::mt19937_64 gen(2024);
  const auto s = testutil::random_state(2, gen);
  const auto h = parse_hamiltonian("qubits 2\n0.3\n0.8 Z0 Z1\n-0.5 X0\n");
  const std::int64_t n1 = 20;
  MomentConfig cfg{n1, MomentMethod::Exact};
  const auto rep = assemble_bias_variance(h, s, SignSource::exact(), cfg);
  const auto signs = exact_signs(s, h);
  const double truth = energy(s, h);

  const BellDistribution dist(s);
  const int trials = 1000000;
  double sum = 0.0;
  double sum2 = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto est = estimate_abs(dist.sample(n1, derive_seed(5, t)), h);
    double e = h.constant();
    for (std::size_t i = 0; i < h.size(); ++i) e += h.term(i).coefficient * signs.signs[i] * est[i].b_hat;
    sum += e;
    sum2 += e * e;
  }
  const double mean = sum / trials;
  const double var = sum2 / trials - mean * mean;
  const double se_mean = std::sqrt(var / trials);
  // Standard error of the sample variance, normal-theory approximation.
  const double se_var = var * std::sqrt(2.0 / trials);
  CHECK(std::abs((mean - truth) - rep.bias) < 5.0 * se_mean);
  CHECK(std::abs(var - rep.variance) < 5.0 * se_var);
}

TEST_CASE("assembly with sampled signs agrees with Monte Carlo") {
  std::mt19937_64 gen(77);
  const auto s = testutil::random_state(2, gen);
  const auto h = parse_hamiltonian("qubits 2\n0.6 Z0\n0.4 Z0 Z1\n-0.5 X1\n0.2 X0 X1\n");
  const auto grouping = qwc_grouping(h);
  const std::int64_t n1 = 15;
  const auto alloc = allocate_shots(grouping, 9, AllocationMode::WDS, 0);
  const auto rep = assemble_bias_variance(h, s, SignSource::sampled(grouping, alloc), {n1, MomentMethod::Exact});
  const double truth = energy(s, h);

  const BellDistribution dist(s);
  std::vector<GroupMeasurement> groups;
  for (const auto& g : grouping.groups) groups.emplace_back(s, h, g);
  const int trials = 400000;
  double sum = 0.0;
  double sum2 = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto seed = derive_seed(9, t);
    const auto est = estimate_abs(dist.sample(n1, derive_seed(seed, 0)), h);
    std::vector<std::vector<TermTally>> tallies;
    for (std::size_t g = 0; g < groups.size(); ++g) tallies.push_back(groups[g].sample(alloc.per_group[g], derive_seed(seed, 2 + g)));
    const auto sv = estimate_signs(tallies, grouping, alloc);
    double e = h.constant();
    for (std::size_t i = 0; i < h.size(); ++i) e += h.term(i).coefficient * sv.signs[i] * est[i].b_hat;
    sum += e;
    sum2 += e * e;
  }
  const double mean = sum / trials;
  const double var = sum2 / trials - mean * mean;
  CHECK(std::abs((mean - truth) - rep.bias) < 5.0 * std::sqrt(var / trials));
  CHECK(std::abs(var - rep.variance) < 5.0 * var * std::sqrt(2.0 / trials));
  CHECK(rep.exp_ss.size() == kernels::pair_count(h.size()));
}

TEST_CASE("assembly on H2") {
  const auto h = load_hamiltonian(data_file("h2.ham"));
  const auto g = ground_state(h);
  const auto rep = assemble_bias_variance(h, g.state, SignSource::exact(), {1000000, MomentMethod::Saddle});
  CHECK(std::abs(rep.bias) < 0.1 * rep.stddev);
  CHECK(rep.saddle_pairs == kernels::pair_count(h.size()));

  // Exact and saddle configurations coincide at or below the pair limit.
  const auto a = assemble_bias_variance(h, g.state, SignSource::exact(), {150, MomentMethod::Exact});
  const auto b = assemble_bias_variance(h, g.state, SignSource::exact(), {150, MomentMethod::Saddle});
  CHECK(a.variance == b.variance);
  CHECK(a.exact_pairs == kernels::pair_count(h.size()));
  CHECK_THROWS_AS(assemble_bias_variance(h, g.state, SignSource::exact(), {1000, MomentMethod::Exact}), Error);

  // Saddle pairs above the limit continue the exact curve smoothly.
  const auto lo = assemble_bias_variance(h, g.state, SignSource::exact(), {200, MomentMethod::Saddle});
  const auto hi = assemble_bias_variance(h, g.state, SignSource::exact(), {201, MomentMethod::Saddle});
  CHECK(hi.stddev == doctest::Approx(lo.stddev).epsilon(0.01));

  MomentConfig pruned{1000};
  pruned.pair_cutoff = 1e6;
  const auto p = assemble_bias_variance(h, g.state, SignSource::exact(), pruned);
  CHECK(p.pruned_pairs == kernels::pair_count(h.size()));
  CHECK(std::isnan(p.exp_bb.front()));

  auto wrong = exact_signs(g.state, h);
  wrong.signs.pop_back();
  CHECK_THROWS_AS(assemble_bias_variance(h, g.state, SignSource::from_vector(wrong), {100}), Error);
}

TEST_CASE("QWC baselines") {
  SUBCASE("single group") {
    const auto h = parse_hamiltonian("qubits 2\n0.5 Z0\n-0.3 Z1\n0.2 Z0 Z1\n");
    std::mt19937_64 gen(1);
    const auto s = testutil::random_state(2, gen);
    const auto g = qwc_grouping(h);
    REQUIRE(g.size() == 1);
    const auto ph = parse_hamiltonian("qubits 2\n0.5 Z0\n-0.3 Z1\n0.2 Z0 Z1\n");
    const auto y = testutil::hamiltonian_matrix(ph);
    const auto psi = testutil::to_eigen(s);
    const double m1 = (psi.adjoint() * y * psi)(0).real();
    const double m2 = (psi.adjoint() * y * y * psi)(0).real();
    const double ref = std::sqrt((m2 - m1 * m1) / 40.0);
    CHECK(qwc_baseline_std(h, s, g, AllocationMode::WDS, 40) == doctest::Approx(ref).epsilon(1e-12));
    CHECK(qwc_baseline_std(h, s, g, AllocationMode::WRS, 40) == doctest::Approx(ref).epsilon(1e-12));
  }
  SUBCASE("eigenstate") {
    const auto h = parse_hamiltonian("qubits 2\n0.5 Z0\n-0.3 Z1\n0.2 Z0 Z1\n");
    const auto g = qwc_grouping(h);
    CHECK(qwc_baseline_std(h, StateVector::basis(2, 2), g, AllocationMode::WDS, 10) == doctest::Approx(0.0));
  }
  SUBCASE("H2 against Monte Carlo") {
    const auto h = load_hamiltonian(data_file("h2.ham"));
    const auto gs = ground_state(h);
    const auto g = qwc_grouping(h);
    const std::int64_t shots = 20000;
    const auto alloc = allocate_shots(g, shots, AllocationMode::WDS, 0);
    std::vector<GroupMeasurement> groups;
    for (const auto& grp : g.groups) groups.emplace_back(gs.state, h, grp);
    const int trials = 100000;
    double sum = 0.0;
    double sum2 = 0.0;
    for (int t = 0; t < trials; ++t) {
      double e = h.constant();
      for (std::size_t k = 0; k < g.size(); ++k) {
        const auto n = alloc.per_group[k];
        const auto tallies = groups[k].sample(n, derive_seed(t, k));
        for (std::size_t a = 0; a < tallies.size(); ++a)
          e += h.term(g.groups[k][a]).coefficient * double(tallies[a].sum()) / double(n);
      }
      sum += e;
      sum2 += e * e;
    }
    const double mean = sum / trials;
    const double mc_std = std::sqrt(sum2 / trials - mean * mean);
    CHECK(qwc_baseline_std(h, gs.state, g, AllocationMode::WDS, shots) == doctest::Approx(mc_std).epsilon(0.03));
    CHECK(mean == doctest::Approx(gs.energy).epsilon(1e-3));
  }
}
