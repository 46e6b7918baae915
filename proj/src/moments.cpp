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

#include "bellsample/moments.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include "bellsample/error.hpp"
#include "bellsample/kernels.hpp"

namespace bellsample {

namespace {

constexpr double kNegligiblePmf = 1e-19;
// Cells of the bivariate marginal below exp(-55) of the pmf scale are skipped.
constexpr double kNegligibleLogMarginal = -55.0;

/// Neumaier-compensated accumulator.
class Accumulator {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void check_probability(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw Error(std::string(what) + " must lie in [0, 1]");
}

void check_joint(const JointProbs& q, const char* what) {
  double s = 0.0;
  for (double v : q) {
    check_probability(v, what);
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-9) throw Error(std::string(what) + ": joint probabilities must sum to 1");
}

double log_binomial_pmf(std::int64_t n, std::int64_t m, double log_q, double log_1mq) {
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  double v = std::lgamma(dn + 1.0) - std::lgamma(dm + 1.0) - std::lgamma(dn - dm + 1.0);
  if (m > 0) v += dm * log_q;
  if (n - m > 0) v += (dn - dm) * log_1mq;
  return v;
}

/**
 * sum_m g(m) Bin(m; n, q). Terms are generated outward from the mode by the
 * pmf ratio and added in descending pmf order; the walk stops once both
 * tails fall below kNegligiblePmf. The result is divided by the accumulated
 * mass, which cancels the round-off of the log-gamma anchor at large n.
 */
double binomial_expectation(double q, std::int64_t n, const std::function<double(std::int64_t)>& g) {
  if (q <= 0.0) return g(0);
  if (q >= 1.0) return g(n);
  const double lq = std::log(q);
  const double l1q = std::log1p(-q);
  const double odds = q / (1.0 - q);
  const auto mode = std::clamp(static_cast<std::int64_t>(std::floor(static_cast<double>(n + 1) * q)),
                               std::int64_t{0}, n);
  const double p_mode = std::exp(log_binomial_pmf(n, mode, lq, l1q));

  Accumulator acc;
  Accumulator mass;
  acc.add(p_mode * g(mode));
  mass.add(p_mode);
  std::int64_t lo = mode - 1;
  std::int64_t hi = mode + 1;
  double p_lo = lo >= 0 ? p_mode * static_cast<double>(mode) / (static_cast<double>(n - mode + 1) * odds) : 0.0;
  double p_hi = hi <= n ? p_mode * static_cast<double>(n - mode) / static_cast<double>(mode + 1) * odds : 0.0;
  while ((lo >= 0 && p_lo > kNegligiblePmf) || (hi <= n && p_hi > kNegligiblePmf)) {
    const bool take_hi = hi <= n && (lo < 0 || p_hi >= p_lo);
    if (take_hi) {
      acc.add(p_hi * g(hi));
      mass.add(p_hi);
      p_hi *= static_cast<double>(n - hi) / static_cast<double>(hi + 1) * odds;
      ++hi;
      if (hi > n) p_hi = 0.0;
    } else {
      acc.add(p_lo * g(lo));
      mass.add(p_lo);
      p_lo *= static_cast<double>(lo) / (static_cast<double>(n - lo + 1) * odds);
      --lo;
      if (lo < 0) p_lo = 0.0;
    }
  }
  return acc.value() / mass.value();
}

/**
 * sum over multinomial counts m of g_a(m1+m2) g_b(m1+m3) Mult(m; n, q).
 * Outer loops run over (A, B) = (m1+m2, m1+m3) cells with non-negligible
 * marginal mass and nonzero weight; the inner sum over m1 is a
 * log-concave sequence walked outward from its mode.
 */
double pair_expectation(const JointProbs& q, std::int64_t n, std::span<const double> ga, std::span<const double> gb) {
  const auto un = static_cast<std::size_t>(n);
  std::vector<double> lg(un + 1);
  for (std::size_t k = 0; k <= un; ++k) lg[k] = std::lgamma(static_cast<double>(k) + 1.0);
  std::array<double, 4> lq{};
  for (int c = 0; c < 4; ++c) lq[c] = q[c] > 0.0 ? std::log(q[c]) : -std::numeric_limits<double>::infinity();

  const auto marginal = [&](double qm) {
    std::vector<double> out(un + 1, -std::numeric_limits<double>::infinity());
    const double a = qm > 0.0 ? std::log(qm) : 0.0;
    const double b = qm < 1.0 ? std::log1p(-qm) : 0.0;
    for (std::int64_t k = 0; k <= n; ++k) {
      if ((qm <= 0.0 && k > 0) || (qm >= 1.0 && k < n)) continue;
      out[static_cast<std::size_t>(k)] = log_binomial_pmf(n, k, a, b);
    }
    return out;
  };
  const auto la = marginal(q[0] + q[1]);
  const auto lb = marginal(q[0] + q[2]);

  const auto log_term = [&](std::int64_t a, std::int64_t b, std::int64_t m1) {
    const std::int64_t m[4] = {m1, a - m1, b - m1, n - a - b + m1};
    double v = lg[un];
    for (int c = 0; c < 4; ++c) {
      v -= lg[static_cast<std::size_t>(m[c])];
      if (m[c] > 0) v += static_cast<double>(m[c]) * lq[c];
    }
    return v;
  };
  const double k_ratio = (q[1] > 0.0 && q[2] > 0.0) ? q[0] * q[3] / (q[1] * q[2]) : 0.0;

  Accumulator total;
  for (std::int64_t a = 0; a <= n; ++a) {
    const double wa = ga[static_cast<std::size_t>(a)];
    if (wa == 0.0 || la[static_cast<std::size_t>(a)] < kNegligibleLogMarginal) continue;
    for (std::int64_t b = 0; b <= n; ++b) {
      const double wb = gb[static_cast<std::size_t>(b)];
      if (wb == 0.0 || lb[static_cast<std::size_t>(b)] < kNegligibleLogMarginal) continue;
      std::int64_t lo = std::max<std::int64_t>(0, a + b - n);
      std::int64_t hi = std::min(a, b);
      // A zero probability pins its count to zero.
      if (q[0] == 0.0) hi = std::min<std::int64_t>(hi, 0);
      if (q[1] == 0.0) lo = std::max(lo, a);
      if (q[2] == 0.0) lo = std::max(lo, b);
      if (q[3] == 0.0) hi = std::min(hi, a + b - n);
      if (q[1] == 0.0) hi = std::min(hi, a);
      if (q[2] == 0.0) hi = std::min(hi, b);
      if (q[3] == 0.0) lo = std::max(lo, a + b - n);
      if (q[0] == 0.0) lo = std::max<std::int64_t>(lo, 0);
      if (lo > hi) continue;
      if (lo == hi) {
        total.add(wa * wb * std::exp(log_term(a, b, lo)));
        continue;
      }
      // All four probabilities are positive here.
      const auto ratio = [&](std::int64_t m) {
        return static_cast<double>(a - m) * static_cast<double>(b - m) * k_ratio /
               (static_cast<double>(m + 1) * static_cast<double>(n - a - b + m + 1));
      };
      std::int64_t left = lo;
      std::int64_t right = hi;
      while (left < right) {
        const std::int64_t mid = left + (right - left) / 2;
        if (ratio(mid) >= 1.0) {
          left = mid + 1;
        } else {
          right = mid;
        }
      }
      const std::int64_t mode = left;
      const double t_mode = std::exp(log_term(a, b, mode));
      if (t_mode == 0.0) continue;
      const double floor_value = t_mode * 1e-18;
      double inner = t_mode;
      double t = t_mode;
      for (std::int64_t m = mode; m < hi; ++m) {
        t *= ratio(m);
        if (t < floor_value) break;
        inner += t;
      }
      t = t_mode;
      for (std::int64_t m = mode - 1; m >= lo; --m) {
        t /= ratio(m);
        if (t < floor_value) break;
        inner += t;
      }
      total.add(wa * wb * inner);
    }
  }
  return total.value();
}

std::vector<double> sqrt_weights(std::int64_t n) {
  std::vector<double> w(static_cast<std::size_t>(n) + 1);
  for (std::int64_t m = 0; m <= n; ++m) {
    w[static_cast<std::size_t>(m)] = std::sqrt(std::max(0.0, 2.0 * static_cast<double>(m) / static_cast<double>(n) - 1.0));
  }
  return w;
}

std::vector<double> sign_weights(std::int64_t n) {
  std::vector<double> w(static_cast<std::size_t>(n) + 1);
  for (std::int64_t m = 0; m <= n; ++m) w[static_cast<std::size_t>(m)] = 2 * m >= n ? 1.0 : -1.0;
  return w;
}

void check_shots(std::int64_t n, const char* what) {
  if (n < 1) throw Error(std::string(what) + ": shot count must be positive");
}

void check_odd(std::int64_t n, const char* what) {
  check_shots(n, what);
  if (n % 2 == 0) throw Error(std::string(what) + ": shot count must be odd");
}

void check_pair_limit(std::int64_t n, const char* what) {
  if (n > kExactPairLimit) {
    throw Error(std::string(what) + ": shot count " + std::to_string(n) + " exceeds the exact triple-sum limit of " +
                std::to_string(kExactPairLimit) + "; use the saddle-point method");
  }
}

}  // namespace

double exp_b_exact(double q, std::int64_t n1) {
  check_probability(q, "exp_b_exact: q");
  check_shots(n1, "exp_b_exact");
  const double dn = static_cast<double>(n1);
  return binomial_expectation(q, n1, [dn](std::int64_t m) { return std::sqrt(std::max(0.0, 2.0 * static_cast<double>(m) / dn - 1.0)); });
}

double exp_b2_exact(double q, std::int64_t n1) {
  check_probability(q, "exp_b2_exact: q");
  check_shots(n1, "exp_b2_exact");
  const double dn = static_cast<double>(n1);
  return binomial_expectation(q, n1, [dn](std::int64_t m) { return std::max(0.0, 2.0 * static_cast<double>(m) / dn - 1.0); });
}

double exp_bb_exact(const JointProbs& q, std::int64_t n1) {
  check_joint(q, "exp_bb_exact");
  check_shots(n1, "exp_bb_exact");
  check_pair_limit(n1, "exp_bb_exact");
  const auto w = sqrt_weights(n1);
  return pair_expectation(q, n1, w, w);
}

double sign_mean(double p, std::int64_t shots) {
  check_probability(p, "sign_mean: p");
  if (shots < 0) throw Error("sign_mean: negative shot count");
  if (shots == 0) return 1.0;
  return binomial_expectation(p, shots, [shots](std::int64_t m) { return 2 * m >= shots ? 1.0 : -1.0; });
}

double sign_pair_mean(const JointProbs& p, std::int64_t shots) {
  check_joint(p, "sign_pair_mean");
  if (shots < 0) throw Error("sign_pair_mean: negative shot count");
  if (shots == 0) return 1.0;
  const auto w = sign_weights(shots);
  return pair_expectation(p, shots, w, w);
}

double exp_s_exact(double p, std::int64_t n2) {
  check_odd(n2, "exp_s_exact");
  return sign_mean(p, n2);
}

double exp_ss_exact(const JointProbs& p, std::int64_t n2g) {
  check_odd(n2g, "exp_ss_exact");
  check_pair_limit(n2g, "exp_ss_exact");
  return sign_pair_mean(p, n2g);
}

double normal_exp_b(double mu, double sigma) {
  if (!(sigma > 0.0)) return std::sqrt(std::max(0.0, mu));
  // x = u^2 removes the square-root endpoint singularity.
  const double x_lo = std::max(0.0, mu - 40.0 * sigma);
  const double x_hi = std::max(mu, 0.0) + 40.0 * sigma;
  const double u_lo = std::sqrt(x_lo);
  const double u_hi = std::sqrt(x_hi);
  const int panels = 20000;
  const double h = (u_hi - u_lo) / panels;
  const auto f = [&](double u) {
    const double z = (u * u - mu) / sigma;
    return 2.0 * u * u * std::exp(-0.5 * z * z);
  };
  Accumulator acc;
  acc.add(f(u_lo) + f(u_hi));
  for (int k = 1; k < panels; ++k) acc.add((k % 2 ? 4.0 : 2.0) * f(u_lo + k * h));
  return acc.value() * h / 3.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

double normal_exp_b2(double mu, double sigma) {
  if (!(sigma > 0.0)) return std::max(0.0, mu);
  const double z = mu / sigma;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return mu * cdf + sigma * pdf;
}

NormalParams normal_params(double q, std::int64_t n1) {
  check_probability(q, "normal_params: q");
  check_shots(n1, "normal_params");
  return {2.0 * q - 1.0, std::sqrt(4.0 * q * (1.0 - q) / static_cast<double>(n1))};
}

double saddle_exp_b(double mu, double sigma) {
  if (!(sigma > 0.0)) return std::sqrt(std::max(0.0, mu));
  const double s2 = sigma * sigma;
  const double root = std::sqrt(mu * mu + 2.0 * s2);
  // Cancellation-free forms of x* and x* - mu.
  const double x = mu >= 0.0 ? (mu + root) / 2.0 : s2 / (root - mu);
  const double dx = mu >= 0.0 ? s2 / (root + mu) : (root - mu) / 2.0;
  const double s = dx * dx / (2.0 * s2) - 0.5 * std::log(x);
  const double s_pp = 1.0 / s2 + 0.5 / (x * x);
  return std::exp(-s) / std::sqrt(s2 * s_pp);
}

double saddle_exp_b2(double mu, double sigma) {
  if (!(sigma > 0.0)) return std::max(0.0, mu);
  const double s2 = sigma * sigma;
  const double root = std::sqrt(mu * mu + 4.0 * s2);
  const double x = mu >= 0.0 ? (mu + root) / 2.0 : 2.0 * s2 / (root - mu);
  const double dx = mu >= 0.0 ? 2.0 * s2 / (root + mu) : (root - mu) / 2.0;
  const double t = dx * dx / (2.0 * s2) - std::log(x);
  const double t_pp = 1.0 / s2 + 1.0 / (x * x);
  return std::exp(-t) / std::sqrt(s2 * t_pp);
}

double saddle_exp_bb(const JointProbs& q_in, std::int64_t n1) {
  check_joint(q_in, "saddle_exp_bb");
  check_shots(n1, "saddle_exp_bb");
  // Probabilities at round-off level are structural zeros of the state.
  JointProbs q = q_in;
  double kept = 0.0;
  for (auto& v : q) {
    if (v < 1e-12) v = 0.0;
    kept += v;
  }
  for (auto& v : q) v /= kept;
  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
  using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
  const double n = static_cast<double>(n1);

  std::vector<int> live;
  for (int c = 0; c < 4; ++c) {
    if (q[c] > 0.0) live.push_back(c);
  }
  if (q[0] == 0.0) return 0.0;
  const auto alpha_of_counts = [&](const std::array<double, 4>& m) { return 2.0 * (m[0] + m[1]) / n - 1.0; };
  const auto beta_of_counts = [&](const std::array<double, 4>& m) { return 2.0 * (m[0] + m[2]) / n - 1.0; };
  if (live.size() == 1) {
    std::array<double, 4> m{};
    m[static_cast<std::size_t>(live[0])] = n;
    return std::sqrt(std::max(0.0, alpha_of_counts(m))) * std::sqrt(std::max(0.0, beta_of_counts(m)));
  }

  const int d = static_cast<int>(live.size()) - 1;
  const int last = live.back();
  Vec mean(d);
  Mat sigma(d, d);
  for (int r = 0; r < d; ++r) {
    mean(r) = n * q[live[r]];
    for (int c = 0; c < d; ++c) {
      sigma(r, c) = n * ((r == c ? q[live[r]] : 0.0) - q[live[r]] * q[live[c]]);
    }
  }
  // alpha = alpha0 + alpha_v . y, beta likewise; y are the free counts.
  const auto affine = [&](int first, int second, double& c0, Vec& v) {
    double cnt = 0.0;
    v = Vec::Zero(d);
    for (int coord : {first, second}) {
      if (q[coord] == 0.0) continue;
      if (coord == last) {
        cnt += n;
        v.array() -= 1.0;
      } else {
        const auto pos = std::find(live.begin(), live.end(), coord) - live.begin();
        v(pos) += 1.0;
      }
    }
    c0 = 2.0 * cnt / n - 1.0;
    v *= 2.0 / n;
  };
  double alpha0 = 0.0;
  double beta0 = 0.0;
  Vec alpha_v;
  Vec beta_v;
  affine(0, 1, alpha0, alpha_v);
  affine(0, 2, beta0, beta_v);

  const bool alpha_const = alpha_v.cwiseAbs().maxCoeff() == 0.0;
  const bool beta_const = beta_v.cwiseAbs().maxCoeff() == 0.0;
  double prefactor = 1.0;
  if (alpha_const) {
    if (alpha0 <= 0.0) return 0.0;
    prefactor *= std::sqrt(alpha0);
  }
  if (beta_const) {
    if (beta0 <= 0.0) return 0.0;
    prefactor *= std::sqrt(beta0);
  }

  const Eigen::LDLT<Mat> sigma_ldlt(sigma);
  const Mat sigma_inv = sigma_ldlt.solve(Mat::Identity(d, d));
  const double det_sigma = sigma.determinant();
  if (!(det_sigma > 0.0)) throw NumericalError("saddle_exp_bb: singular covariance");

  const auto feasible = [&](const Vec& y) {
    return (alpha_const || alpha0 + alpha_v.dot(y) > 0.0) && (beta_const || beta0 + beta_v.dot(y) > 0.0);
  };
  const auto objective = [&](const Vec& y) {
    const Vec r = y - mean;
    double u = 0.5 * r.dot(sigma_inv * r);
    if (!alpha_const) u -= 0.5 * std::log(alpha0 + alpha_v.dot(y));
    if (!beta_const) u -= 0.5 * std::log(beta0 + beta_v.dot(y));
    return u;
  };
  const auto gradient = [&](const Vec& y) {
    Vec g = sigma_inv * (y - mean);
    if (!alpha_const) g -= 0.5 * alpha_v / (alpha0 + alpha_v.dot(y));
    if (!beta_const) g -= 0.5 * beta_v / (beta0 + beta_v.dot(y));
    return g;
  };
  const auto hessian = [&](const Vec& y) {
    Mat hm = sigma_inv;
    if (!alpha_const) {
      const double a = alpha0 + alpha_v.dot(y);
      hm += 0.5 * alpha_v * alpha_v.transpose() / (a * a);
    }
    if (!beta_const) {
      const double b = beta0 + beta_v.dot(y);
      hm += 0.5 * beta_v * beta_v.transpose() / (b * b);
    }
    return hm;
  };

  Vec y = mean;
  if (!feasible(y)) {
    // Move toward the all-(++) vertex, where alpha = beta = 1.
    Vec vertex = Vec::Zero(d);
    if (last != 0) vertex(std::find(live.begin(), live.end(), 0) - live.begin()) = n;
    double t_need = 0.0;
    for (const auto& [c0, v] : {std::pair{alpha0, alpha_v}, std::pair{beta0, beta_v}}) {
      const double at_mean = c0 + v.dot(mean);
      if (at_mean <= 0.0) t_need = std::max(t_need, -at_mean / (1.0 - at_mean));
    }
    const double t = std::min(1.0, t_need + (1.0 - t_need) / std::sqrt(n));
    y = mean + t * (vertex - mean);
    if (!feasible(y)) throw NumericalError("saddle_exp_bb: no feasible start; use exact summation");
  }

  bool converged = false;
  for (int iter = 0; iter < 100; ++iter) {
    const Vec g = gradient(y);
    if (g.cwiseAbs().maxCoeff() < 1e-10) {
      converged = true;
      break;
    }
    const Mat hm = hessian(y);
    const Vec step = -hm.ldlt().solve(g);
    const double decrement = -g.dot(step);
    const double u0 = objective(y);
    double s = 1.0;
    Vec next = y + step;
    int halvings = 0;
    // Once the decrement is at the round-off level of U the sufficient-decrease
    // test is noise; only feasibility is enforced.
    const bool polish = decrement < 1e-12 * (1.0 + std::abs(u0));
    while (!feasible(next) || (!polish && objective(next) > u0 - 1e-4 * s * decrement)) {
      s *= 0.5;
      next = y + s * step;
      if (++halvings > 60) break;
    }
    if (halvings > 60) {
      converged = gradient(y).cwiseAbs().maxCoeff() < 1e-6;
      break;
    }
    y = next;
  }
  if (!converged) throw NumericalError("saddle_exp_bb: Newton iteration did not converge; use exact summation");

  const double det_h = hessian(y).determinant();
  return prefactor * std::exp(-objective(y)) / std::sqrt(det_sigma * det_h);
}

double small_mu_constant() { return std::tgamma(0.75) / (std::pow(2.0, 0.75) * std::sqrt(std::numbers::pi)); }

AsymptoticPrediction asymptotic_reference(double mu, std::int64_t n1) {
  check_shots(n1, "asymptotic_reference");
  if (!(mu >= -1.0 && mu <= 1.0)) throw Error("asymptotic_reference: mu must lie in [-1, 1]");
  const double sigma = std::sqrt((1.0 - mu * mu) / static_cast<double>(n1));
  AsymptoticPrediction out;
  out.large_mu = mu > sigma;
  if (out.large_mu) {
    const double s2 = sigma * sigma;
    out.bias = -s2 / (8.0 * std::pow(mu, 1.5));
    out.stddev = std::sqrt(std::max(0.0, s2 / (4.0 * mu) - s2 * s2 / (64.0 * mu * mu * mu)));
  } else {
    const double c = small_mu_constant();
    out.bias = c * std::sqrt(sigma) - std::sqrt(std::max(0.0, mu));
    out.stddev = std::sqrt(std::max(0.0, (1.0 / std::sqrt(2.0 * std::numbers::pi) - c * c) * sigma));
  }
  return out;
}

std::string_view to_string(MomentMethod m) { return m == MomentMethod::Exact ? "exact" : "saddle"; }

SignSource SignSource::from_vector(SignVector v) {
  SignSource s;
  s.kind = Kind::Fixed;
  s.fixed = std::move(v);
  return s;
}

SignSource SignSource::sampled(const Grouping& g, ShotAllocation a) {
  SignSource s;
  s.kind = Kind::Sampled;
  s.grouping = &g;
  s.allocation = std::move(a);
  return s;
}

MomentReport assemble_bias_variance(const PauliHamiltonian& h, const StateVector& state, const SignSource& signs,
                                    const MomentConfig& config) {
  check_shots(config.n1, "assemble_bias_variance");
  const std::size_t m = h.size();
  const auto moments = pauli_moments(state, h);
  MomentReport rep;
  rep.exp_b.resize(m);
  rep.exp_b2.resize(m);
  rep.exp_s.resize(m);

  std::vector<std::int64_t> group_shots;
  switch (signs.kind) {
    case SignSource::Kind::Exact:
      for (std::size_t i = 0; i < m; ++i) rep.exp_s[i] = moments.mu[i] < 0.0 ? -1.0 : 1.0;
      break;
    case SignSource::Kind::Fixed:
      if (signs.fixed.size() != m) throw Error("assemble_bias_variance: sign vector does not match the Hamiltonian");
      for (std::size_t i = 0; i < m; ++i) rep.exp_s[i] = signs.fixed.signs[i];
      break;
    case SignSource::Kind::Sampled: {
      if (!signs.grouping || signs.grouping->group_of.size() != m) {
        throw Error("assemble_bias_variance: sampled signs need the Hamiltonian's grouping");
      }
      if (signs.allocation.per_group.size() != signs.grouping->size()) {
        throw Error("assemble_bias_variance: allocation does not match the grouping");
      }
      for (std::size_t i = 0; i < m; ++i) {
        const auto shots = signs.allocation.per_group[signs.grouping->group_of[i]];
        if (shots > config.exact_pair_limit) {
          throw Error("assemble_bias_variance: analytic sampled-sign moments need group shot counts <= " +
                      std::to_string(config.exact_pair_limit) + "; use Monte Carlo");
        }
        group_shots.push_back(shots);
      }
      break;
    }
  }

  kernels::for_each_index(m, [&](std::size_t i) {
    try {
      rep.exp_b[i] = exp_b_exact(moments.q[i], config.n1);
      rep.exp_b2[i] = exp_b2_exact(moments.q[i], config.n1);
      if (signs.kind == SignSource::Kind::Sampled) rep.exp_s[i] = sign_mean(moments.p[i], group_shots[i]);
    } catch (const std::exception& e) {
      throw Error("term " + std::to_string(i) + ": " + e.what());
    }
  });

  const bool use_saddle = config.n1 > config.exact_pair_limit;
  if (use_saddle && config.method == MomentMethod::Exact) {
    throw Error("assemble_bias_variance: exact pair sums are limited to N1 <= " +
                std::to_string(config.exact_pair_limit) + "; use the saddle-point method");
  }
  std::vector<double> saddle_b;
  if (use_saddle) {
    saddle_b.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      const auto np = normal_params(moments.q[i], config.n1);
      saddle_b[i] = saddle_exp_b(np.mu, np.sigma);
    }
  }

  std::vector<PauliString> strings;
  strings.reserve(m);
  for (const auto& t : h.terms()) strings.push_back(t.string);
  const auto products = kernels::pair_products(state.amplitudes(), strings);
  const std::size_t pairs = kernels::pair_count(m);
  rep.exp_bb.assign(pairs, std::numeric_limits<double>::quiet_NaN());
  if (signs.kind == SignSource::Kind::Sampled) rep.exp_ss.assign(pairs, 0.0);
  std::vector<double> pair_var(pairs, 0.0);
  std::vector<unsigned char> pruned(pairs, 0);

  kernels::for_each_pair(m, [&](std::size_t i, std::size_t j, std::size_t k) {
    const double ci = h.term(i).coefficient;
    const double cj = h.term(j).coefficient;
    if (std::abs(ci * cj) < config.pair_cutoff) {
      pruned[k] = 1;
      return;
    }
    double ebb = 0.0;
    try {
      const auto qij = joint_probs_doubled(moments.mu[i], moments.mu[j], products[k]);
      if (use_saddle) {
        ebb = saddle_exp_bb(qij, config.n1) - saddle_b[i] * saddle_b[j] + rep.exp_b[i] * rep.exp_b[j];
      } else {
        ebb = exp_bb_exact(qij, config.n1);
      }
    } catch (const std::exception& e) {
      throw Error("pair (" + std::to_string(i) + ", " + std::to_string(j) + "): " + e.what());
    }
    rep.exp_bb[k] = ebb;
    double ess = rep.exp_s[i] * rep.exp_s[j];
    if (signs.kind == SignSource::Kind::Sampled) {
      if (signs.grouping->group_of[i] == signs.grouping->group_of[j]) {
        const auto pij = joint_probs_single(moments.mu[i], moments.mu[j], products[k].real());
        ess = sign_pair_mean(pij, group_shots[i]);
      }
      rep.exp_ss[k] = ess;
    }
    pair_var[k] = 2.0 * ci * cj * (ess * ebb - rep.exp_s[i] * rep.exp_b[i] * rep.exp_s[j] * rep.exp_b[j]);
  });

  Accumulator bias;
  Accumulator var;
  for (std::size_t i = 0; i < m; ++i) {
    const double c = h.term(i).coefficient;
    bias.add(c * (rep.exp_s[i] * rep.exp_b[i] - moments.mu[i]));
    const double mean = rep.exp_s[i] * rep.exp_b[i];
    var.add(c * c * (rep.exp_b2[i] - mean * mean));
  }
  for (std::size_t k = 0; k < pairs; ++k) {
    if (pruned[k]) {
      ++rep.pruned_pairs;
      continue;
    }
    var.add(pair_var[k]);
  }
  (use_saddle ? rep.saddle_pairs : rep.exact_pairs) = pairs - rep.pruned_pairs;
  rep.bias = bias.value();
  rep.variance = var.value();
  if (rep.variance < -1e-9) throw NumericalError("assemble_bias_variance: negative variance " + std::to_string(rep.variance));
  rep.stddev = std::sqrt(std::max(0.0, rep.variance));
  return rep;
}

double qwc_baseline_std(const PauliHamiltonian& h, const StateVector& state, const Grouping& grouping,
                        AllocationMode mode, std::int64_t shots) {
  check_shots(shots, "qwc_baseline_std");
  if (const auto why = validate_grouping(h, grouping); !why.empty()) throw Error("qwc_baseline_std: " + why);
  const auto moments = pauli_moments(state, h);
  double total = 0.0;
  double mean_sum = 0.0;
  for (std::size_t g = 0; g < grouping.size(); ++g) {
    const auto& members = grouping.groups[g];
    double mean = 0.0;
    double second = 0.0;
    for (std::size_t a = 0; a < members.size(); ++a) {
      const std::size_t i = members[a];
      const double ci = h.term(i).coefficient;
      mean += ci * moments.mu[i];
      second += ci * ci;
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        const std::size_t j = members[b];
        const auto prod = multiply(h.term(i).string, h.term(j).string);
        second += 2.0 * ci * h.term(j).coefficient * expectation(state, prod.string);
      }
    }
    const double w = grouping.weights[g];
    if (!(w > 0.0)) {
      if (second > 0.0) throw Error("qwc_baseline_std: zero-weight group with nonzero terms");
      continue;
    }
    total += mode == AllocationMode::WDS ? std::max(0.0, second - mean * mean) / w : second / w;
    mean_sum += mean;
  }
  if (mode == AllocationMode::WRS) total -= mean_sum * mean_sum;
  return std::sqrt(std::max(0.0, total) / static_cast<double>(shots));
}

}  // namespace bellsample
