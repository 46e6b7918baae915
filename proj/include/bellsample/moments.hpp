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
 * Moments of the Bell-sampling estimator b = sqrt(max(0, a)) and of the
 * majority-vote sign estimator, by exact binomial/multinomial summation or
 * by saddle-point evaluation of the normal approximation, and their
 * assembly into the bias and variance of the energy estimator
 *
 *     h = c_0 + sum_i c_i s_i b_i.
 *
 * Conventions: q is the probability that P (x) P reads +1 on the doubled
 * state, q = (1 + <P>^2)/2; p is the probability that P reads +1 on one
 * copy, p = (1 + <P>)/2. Joint probability vectors are ordered
 * (++, +-, -+, --) like JointProbs.
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bellsample/pauli.hpp"
#include "bellsample/signs.hpp"
#include "bellsample/state.hpp"

namespace bellsample {

/// Largest shot count accepted by the triple-sum routines.
inline constexpr std::int64_t kExactPairLimit = 200;

double exp_b_exact(double q, std::int64_t n1);
double exp_b2_exact(double q, std::int64_t n1);
/// E[b_i b_j]; throws for n1 > kExactPairLimit.
double exp_bb_exact(const JointProbs& q, std::int64_t n1);
/// E[s] for an odd shot count.
double exp_s_exact(double p, std::int64_t n2);
/// E[s_i s_j] for two members of one group measured n2g (odd) times.
double exp_ss_exact(const JointProbs& p, std::int64_t n2g);

/**
 * Sign moments for any shot count, including the tie and zero-shot rules of
 * estimate_signs (a tie or no shots gives +1).
 */
double sign_mean(double p, std::int64_t shots);
double sign_pair_mean(const JointProbs& p, std::int64_t shots);

/// Normal-approximation integrals E[sqrt(max(0, X))] and E[max(0, X)],
/// X ~ N(mu, sigma^2). Reference values only.
double normal_exp_b(double mu, double sigma);
double normal_exp_b2(double mu, double sigma);

/// Mean and standard deviation of a = 2m/N - 1: mu = 2q - 1, sigma = sqrt(4q(1-q)/N).
struct NormalParams {
  double mu = 0.0;
  double sigma = 0.0;
};
NormalParams normal_params(double q, std::int64_t n1);

double saddle_exp_b(double mu, double sigma);
double saddle_exp_b2(double mu, double sigma);
/**
 * Saddle-point value of E[b_i b_j]: zero-probability coordinates are
 * dropped, the last remaining one eliminated, and the stationary point of
 *
 *     U(m) = (m - N q)^T Sigma^{-1} (m - N q) / 2 - log(alpha)/2 - log(beta)/2
 *
 * found by damped Newton iteration with feasibility backtracking
 * (alpha = 2(m1+m2)/N - 1, beta = 2(m1+m3)/N - 1). Throws NumericalError
 * when Newton does not converge in 100 iterations.
 */
double saddle_exp_bb(const JointProbs& q, std::int64_t n1);

/// Closed-form large- and small-mu asymptotics of b for a doubled mean
/// mu = 2q - 1 = <P>^2.
struct AsymptoticPrediction {
  double bias = 0.0;
  double stddev = 0.0;
  bool large_mu = true;  ///< mu > sigma
};
AsymptoticPrediction asymptotic_reference(double mu, std::int64_t n1);

/// Gamma(3/4) / (2^{3/4} sqrt(pi)): limit of E[b]/sqrt(sigma) at mu = 0.
double small_mu_constant();

enum class MomentMethod {
  Exact,   ///< exact summation everywhere; pairs limited to kExactPairLimit
  Saddle,  ///< exact per-term sums; pairs exact up to the limit, saddle point above
};

std::string_view to_string(MomentMethod m);

struct MomentConfig {
  std::int64_t n1 = 1;
  MomentMethod method = MomentMethod::Saddle;
  /// Skip covariance pairs with |c_i c_j| below this value.
  double pair_cutoff = 0.0;
  std::int64_t exact_pair_limit = kExactPairLimit;
};

/// Where the signs come from.
struct SignSource {
  enum class Kind { Exact, Fixed, Sampled };
  Kind kind = Kind::Exact;
  SignVector fixed;                ///< Kind::Fixed
  const Grouping* grouping = nullptr;  ///< Kind::Sampled
  ShotAllocation allocation;       ///< Kind::Sampled, deterministic per-group counts

  static SignSource exact() { return {}; }
  static SignSource from_vector(SignVector v);
  static SignSource sampled(const Grouping& g, ShotAllocation a);
};

struct MomentReport {
  std::vector<double> exp_b;
  std::vector<double> exp_b2;
  std::vector<double> exp_s;
  /// E[b_i b_j] for i < j in for_each_pair order; NaN for pruned pairs.
  std::vector<double> exp_bb;
  /// E[s_i s_j] for i < j; filled for sampled signs only.
  std::vector<double> exp_ss;
  double bias = 0.0;
  double variance = 0.0;
  double stddev = 0.0;
  std::size_t saddle_pairs = 0;
  std::size_t exact_pairs = 0;
  std::size_t pruned_pairs = 0;
};

MomentReport assemble_bias_variance(const PauliHamiltonian& h, const StateVector& state, const SignSource& signs,
                                    const MomentConfig& config);

/**
 * Standard deviation of the grouped single-copy estimator after `shots`
 * state preparations. WDS: V = sum_g Var[Y_g] / w_g. WRS: each shot picks
 * group g with probability w_g and contributes Y_g / w_g, so
 * V = sum_g E[Y_g^2] / w_g - (sum_g E[Y_g])^2. Y_g = sum_{i in g} c_i x_i.
 */
double qwc_baseline_std(const PauliHamiltonian& h, const StateVector& state, const Grouping& grouping,
                        AllocationMode mode, std::int64_t shots);

}  // namespace bellsample
