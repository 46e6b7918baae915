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
 * Signs of <P_i>: from a classical oracle file, from the exact state, or by
 * majority vote over conventional grouped measurements with weighted
 * deterministic (WDS) or weighted random (WRS) shot allocation.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bellsample/pauli.hpp"
#include "bellsample/state.hpp"

namespace bellsample {

enum class AllocationMode { WDS, WRS };

std::string_view to_string(AllocationMode mode);
AllocationMode parse_allocation_mode(std::string_view text);

struct ShotAllocation {
  std::vector<std::int64_t> per_group;
  AllocationMode mode = AllocationMode::WDS;
  std::int64_t total = 0;
};

/**
 * WDS: groups whose nominal share n2*w_g is below 1 get nothing; the budget
 * is apportioned over the rest by largest remainder, then even counts are
 * paired off with +1/-1 moves so every count is odd and the total is kept.
 * When the number of funded groups and n2 differ in parity, one funded
 * group (the one closest to its nominal share) keeps an even count.
 *
 * WRS: multinomial draw of n2 shots with probabilities w_g.
 */
ShotAllocation allocate_shots(const Grouping& grouping, std::int64_t n2, AllocationMode mode, std::uint64_t seed);

/// Number of +1 and -1 outcomes of one term.
struct TermTally {
  std::int64_t plus = 0;
  std::int64_t minus = 0;

  std::int64_t sum() const noexcept { return plus - minus; }
};

/**
 * Measures a qubit-wise commuting group `shots` times in its shared local
 * basis and tallies the +/-1 outcome of every member string. Tallies are
 * indexed like `group`. Throws if the group is not QWC.
 */
std::vector<TermTally> sample_group_outcomes(const StateVector& state, const PauliHamiltonian& h,
                                             std::span<const std::size_t> group, std::int64_t shots,
                                             std::uint64_t seed);

/// Outcome distribution of a group's shared measurement basis; sample()
/// draws a tally for `shots` shots in O(2^n |group|).
class GroupMeasurement {
 public:
  GroupMeasurement(const StateVector& state, const PauliHamiltonian& h, std::span<const std::size_t> group);

  std::vector<TermTally> sample(std::int64_t shots, std::uint64_t seed) const;
  /// Probability of each rotated-basis outcome word.
  std::span<const double> outcome_probabilities() const noexcept { return probs_; }

 private:
  std::vector<std::uint64_t> supports_;  // z-type mask of each member in the rotated basis
  std::vector<double> probs_;
};

enum class SignProvenance { OracleFile, Sampled, Exact };

struct SignVector {
  std::vector<int> signs;  ///< +1 or -1 per non-identity term
  SignProvenance provenance = SignProvenance::Exact;
  std::vector<std::string> warnings;

  std::size_t size() const noexcept { return signs.size(); }
};

/**
 * Majority sign per term from per-group tallies (tallies[g][k] belongs to
 * grouping.groups[g][k]). Zero-shot groups give +1; a tied sum (even shot
 * count) gives +1.
 */
SignVector estimate_signs(const std::vector<std::vector<TermTally>>& tallies, const Grouping& grouping,
                          const ShotAllocation& allocation);

/// Signs of the exact <P_i>; <P_i> = 0 maps to +1.
SignVector exact_signs(const StateVector& state, const PauliHamiltonian& h);

/**
 * Reads a sign-oracle document ("qubits N" header, then one line per term:
 * factor list followed by a signed real). Every non-identity term of h must
 * appear once. Zero entries give +1 and a warning.
 */
SignVector parse_sign_oracle(std::string_view text, const PauliHamiltonian& h);
SignVector load_sign_oracle(const std::filesystem::path& path, const PauliHamiltonian& h);

}  // namespace bellsample
