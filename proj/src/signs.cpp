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

#include "bellsample/signs.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>

#include "bellsample/error.hpp"
#include "bellsample/rng.hpp"
#include "text_util.hpp"

namespace bellsample {

std::string_view to_string(AllocationMode mode) { return mode == AllocationMode::WDS ? "wds" : "wrs"; }

AllocationMode parse_allocation_mode(std::string_view text) {
  if (text == "wds" || text == "WDS") return AllocationMode::WDS;
  if (text == "wrs" || text == "WRS") return AllocationMode::WRS;
  throw Error("unknown grouping mode '" + std::string(text) + "' (expected wds or wrs)");
}

namespace {

ShotAllocation allocate_wds(const std::vector<double>& weights, std::int64_t n2) {
  const std::size_t g = weights.size();
  std::vector<std::size_t> funded;
  for (std::size_t k = 0; k < g; ++k) {
    if (static_cast<double>(n2) * weights[k] >= 1.0) funded.push_back(k);
  }
  if (funded.empty()) {
    funded.push_back(static_cast<std::size_t>(std::max_element(weights.begin(), weights.end()) - weights.begin()));
  }
  double funded_weight = 0.0;
  for (std::size_t k : funded) funded_weight += weights[k];

  std::vector<double> nominal(g, 0.0);
  std::vector<std::int64_t> counts(g, 0);
  std::int64_t assigned = 0;
  for (std::size_t k : funded) {
    nominal[k] = static_cast<double>(n2) * weights[k] / funded_weight;
    counts[k] = static_cast<std::int64_t>(std::floor(nominal[k]));
    assigned += counts[k];
  }
  // Largest remainder.
  std::vector<std::size_t> by_remainder = funded;
  std::stable_sort(by_remainder.begin(), by_remainder.end(), [&](std::size_t a, std::size_t b) {
    return (nominal[a] - std::floor(nominal[a])) > (nominal[b] - std::floor(nominal[b]));
  });
  for (std::size_t r = 0; assigned < n2; r = (r + 1) % by_remainder.size()) {
    ++counts[by_remainder[r]];
    ++assigned;
  }
  while (assigned > n2) {
    // Floating-point overshoot: take back from the largest count.
    const auto it = std::max_element(counts.begin(), counts.end());
    --*it;
    --assigned;
  }

  // Parity: pair off even counts, +1 to the larger deficits, -1 to the rest.
  std::vector<std::size_t> evens;
  for (std::size_t k : funded) {
    if (counts[k] % 2 == 0) evens.push_back(k);
  }
  const auto deficit = [&](std::size_t k) { return nominal[k] - static_cast<double>(counts[k]); };
  if (evens.size() % 2 == 1) {
    const auto keep = std::min_element(evens.begin(), evens.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(deficit(a)) < std::abs(deficit(b));
    });
    evens.erase(keep);
  }
  std::stable_sort(evens.begin(), evens.end(), [&](std::size_t a, std::size_t b) { return deficit(a) > deficit(b); });
  for (std::size_t r = 0; r < evens.size(); ++r) counts[evens[r]] += (r < evens.size() / 2) ? 1 : -1;

  return {counts, AllocationMode::WDS, n2};
}

/// Single-qubit unitary applied to qubit k; row-major 2x2.
void apply_1q(std::vector<Complex>& psi, int k, const std::array<Complex, 4>& u) {
  const std::size_t bit = std::size_t{1} << k;
  for (std::size_t x = 0; x < psi.size(); ++x) {
    if (x & bit) continue;
    const Complex a0 = psi[x];
    const Complex a1 = psi[x | bit];
    psi[x] = u[0] * a0 + u[1] * a1;
    psi[x | bit] = u[2] * a0 + u[3] * a1;
  }
}

}  // namespace

ShotAllocation allocate_shots(const Grouping& grouping, std::int64_t n2, AllocationMode mode, std::uint64_t seed) {
  if (n2 < 1) throw Error("allocate_shots: total shot count must be positive");
  if (grouping.size() == 0) throw Error("allocate_shots: empty grouping");
  if (mode == AllocationMode::WDS) return allocate_wds(grouping.weights, n2);
  Rng rng(seed);
  return {sample_multinomial(rng, grouping.weights, n2), AllocationMode::WRS, n2};
}

GroupMeasurement::GroupMeasurement(const StateVector& state, const PauliHamiltonian& h,
                                   std::span<const std::size_t> group) {
  if (state.num_qubits() != h.num_qubits()) throw Error("GroupMeasurement: qubit counts differ");
  const int n = h.num_qubits();
  PauliString basis(n);
  for (std::size_t idx : group) {
    const auto& p = h.term(idx).string;
    if (!qubit_wise_commutes(p, basis)) throw Error("sample_group_outcomes: group is not qubit-wise commuting");
    basis = PauliString(n, basis.x_mask() | p.x_mask(), basis.z_mask() | p.z_mask());
    supports_.push_back(p.x_mask() | p.z_mask());
  }
  std::vector<Complex> psi(state.amplitudes().begin(), state.amplitudes().end());
  const double r = 1.0 / std::sqrt(2.0);
  const std::array<Complex, 4> hadamard = {r, r, r, -r};
  // H S^dagger maps the Y eigenbasis onto the computational basis.
  const std::array<Complex, 4> y_to_z = {r, Complex{0.0, -r}, r, Complex{0.0, r}};
  for (int k = 0; k < n; ++k) {
    switch (basis.letter(k)) {
      case PauliLetter::X: apply_1q(psi, k, hadamard); break;
      case PauliLetter::Y: apply_1q(psi, k, y_to_z); break;
      default: break;
    }
  }
  probs_.resize(psi.size());
  for (std::size_t x = 0; x < psi.size(); ++x) probs_[x] = std::norm(psi[x]);
}

std::vector<TermTally> GroupMeasurement::sample(std::int64_t shots, std::uint64_t seed) const {
  if (shots < 0) throw Error("sample_group_outcomes: negative shot count");
  std::vector<TermTally> tallies(supports_.size());
  if (shots == 0) return tallies;
  Rng rng(seed);
  const auto counts = sample_multinomial(rng, probs_, shots);
  for (std::size_t w = 0; w < counts.size(); ++w) {
    if (counts[w] == 0) continue;
    for (std::size_t k = 0; k < supports_.size(); ++k) {
      if (std::popcount(w & supports_[k]) & 1) {
        tallies[k].minus += counts[w];
      } else {
        tallies[k].plus += counts[w];
      }
    }
  }
  return tallies;
}

std::vector<TermTally> sample_group_outcomes(const StateVector& state, const PauliHamiltonian& h,
                                             std::span<const std::size_t> group, std::int64_t shots,
                                             std::uint64_t seed) {
  return GroupMeasurement(state, h, group).sample(shots, seed);
}

SignVector estimate_signs(const std::vector<std::vector<TermTally>>& tallies, const Grouping& grouping,
                          const ShotAllocation& allocation) {
  if (tallies.size() != grouping.size() || allocation.per_group.size() != grouping.size()) {
    throw Error("estimate_signs: tallies, allocation and grouping disagree in group count");
  }
  SignVector out;
  out.provenance = SignProvenance::Sampled;
  out.signs.assign(grouping.group_of.size(), 1);
  for (std::size_t g = 0; g < grouping.size(); ++g) {
    const auto shots = allocation.per_group[g];
    if (shots == 0) continue;
    if (tallies[g].size() != grouping.groups[g].size()) throw Error("estimate_signs: tally size mismatch");
    for (std::size_t k = 0; k < tallies[g].size(); ++k) {
      const auto& t = tallies[g][k];
      if (t.plus + t.minus != shots) throw Error("estimate_signs: tally does not match allocated shots");
      const auto s = t.sum();
      // Odd shot counts can never tie.
      if (shots % 2 == 1 && s == 0) throw Error("estimate_signs: tie with an odd shot count");
      out.signs[grouping.groups[g][k]] = s < 0 ? -1 : 1;
    }
  }
  return out;
}

SignVector exact_signs(const StateVector& state, const PauliHamiltonian& h) {
  const auto m = pauli_moments(state, h);
  SignVector out;
  out.provenance = SignProvenance::Exact;
  out.signs.reserve(m.mu.size());
  for (double mu : m.mu) out.signs.push_back(mu < 0.0 ? -1 : 1);
  return out;
}

SignVector parse_sign_oracle(std::string_view text, const PauliHamiltonian& h) {
  std::map<PauliString, std::size_t> index;
  for (std::size_t i = 0; i < h.size(); ++i) index.emplace(h.term(i).string, i);
  SignVector out;
  out.provenance = SignProvenance::OracleFile;
  out.signs.assign(h.size(), 0);
  int n = 0;
  std::size_t lineno = 0;
  for (std::string_view line : detail::split_lines(text)) {
    ++lineno;
    const auto tokens = detail::split_ws(line);
    if (tokens.empty() || tokens[0].front() == '#') continue;
    if (tokens[0] == "qubits") {
      const auto v = tokens.size() == 2 ? detail::parse_int(tokens[1]) : std::nullopt;
      if (!v) throw ParseError(lineno, "expected 'qubits N'");
      n = static_cast<int>(*v);
      if (n != h.num_qubits()) {
        throw ParseError(lineno, "oracle declares " + std::to_string(n) + " qubits, Hamiltonian has " +
                                     std::to_string(h.num_qubits()));
      }
      continue;
    }
    if (n == 0) throw ParseError(lineno, "entry before 'qubits N' header");
    const auto value = detail::parse_double(tokens.back());
    if (!value || !std::isfinite(*value)) throw ParseError(lineno, "unparseable oracle value '" + std::string(tokens.back()) + "'");
    if (tokens.size() == 1) continue;  // identity entry carries no sign
    const auto p = parse_factors(std::span(tokens).first(tokens.size() - 1), n, lineno);
    const auto it = index.find(p);
    if (it == index.end()) throw ParseError(lineno, "term " + p.factors() + " is not in the Hamiltonian");
    if (out.signs[it->second] != 0) throw ParseError(lineno, "duplicate entry for " + p.factors());
    if (*value == 0.0) {
      out.signs[it->second] = 1;
      out.warnings.push_back("oracle value for " + p.factors() + " is zero; using +1");
    } else {
      out.signs[it->second] = *value < 0.0 ? -1 : 1;
    }
  }
  for (std::size_t i = 0; i < out.signs.size(); ++i) {
    if (out.signs[i] == 0) throw Error("sign oracle is missing term " + h.term(i).string.factors());
  }
  return out;
}

SignVector load_sign_oracle(const std::filesystem::path& path, const PauliHamiltonian& h) {
  return parse_sign_oracle(detail::read_file(path), h);
}

}  // namespace bellsample
