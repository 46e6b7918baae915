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
 * Sweep drivers: single-Pauli moment curves, molecular bias/std curves
 * against the grouped-measurement baselines, and their CSV + JSON output.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bellsample/moments.hpp"
#include "bellsample/pauli.hpp"
#include "bellsample/signs.hpp"
#include "bellsample/state.hpp"

namespace bellsample {

/// 1 kcal/mol in Hartree, the chemical-accuracy reference line.
inline constexpr double kChemicalAccuracyHartree = 1.6e-3;

enum class SignMode { Exact, Oracle, Sampled };

struct EvalMethod {
  enum class Kind { Exact, Saddle, MonteCarlo };
  Kind kind = Kind::Saddle;
  std::int64_t trials = 1000;

  /// "exact", "saddle", "mc" or "mc:<trials>".
  static EvalMethod parse(std::string_view text);
  std::string tag() const;
};

/// Default grid: 10^1 .. 10^7 with 4 points per decade.
std::vector<std::int64_t> default_n1_grid();
/// "10,100,1000" or "log:<lo>:<hi>:<points-per-decade>".
std::vector<std::int64_t> parse_n1_grid(std::string_view text);

struct ExperimentConfig {
  std::filesystem::path hamiltonian_path;
  SignMode sign_mode = SignMode::Exact;
  std::filesystem::path oracle_path;
  std::vector<std::int64_t> n1_grid = default_n1_grid();
  double n2_ratio = 5.0;
  AllocationMode grouping_mode = AllocationMode::WDS;
  EvalMethod method;
  std::uint64_t seed = 0;
  std::filesystem::path output_path;
  double pair_cutoff = 0.0;

  /// Throws Error on a violated invariant.
  void validate() const;
  /// "exact", "oracle:<path>" or "sampled".
  void set_sign_mode(std::string_view text);
};

struct SweepRow {
  std::int64_t n1 = 0;
  std::int64_t n2 = 0;  ///< sign shots; 0 when signs are not sampled
  double bias = 0.0;
  char bias_sign = '+';
  double stddev = 0.0;
  double qwc_wds_std = 0.0;
  double qwc_wrs_std = 0.0;
  std::string method;
  std::int64_t trials = 0;  ///< Monte Carlo trials, 0 for analytic rows
  double bias_stderr = 0.0;

  double total_error() const { return std::abs(bias) + stddev; }
};

struct MolecularSweep {
  std::vector<SweepRow> rows;
  int num_qubits = 0;
  std::size_t num_terms = 0;
  std::size_t num_groups = 0;
  double ground_energy = 0.0;
  std::vector<std::string> warnings;
};

/// Everything one sweep needs about the Hamiltonian and its ground state.
struct MolecularProblem {
  PauliHamiltonian h;
  StateVector state;
  double energy = 0.0;
  Grouping grouping;

  static MolecularProblem from_hamiltonian(PauliHamiltonian h);
};

MolecularSweep run_molecular_sweep(const ExperimentConfig& config);
/// Same, on an already loaded problem (used by tests and the acceptance run).
MolecularSweep run_molecular_sweep(const MolecularProblem& problem, const ExperimentConfig& config,
                                   const SignVector* oracle = nullptr);

/**
 * Monte Carlo moments of the full pipeline at one N1: `trials` independent
 * runs of Bell sampling, sign estimation and energy assembly.
 */
struct MonteCarloMoments {
  double mean = 0.0;
  double bias = 0.0;
  double stddev = 0.0;
  double bias_stderr = 0.0;
};
MonteCarloMoments monte_carlo_energy(const MolecularProblem& problem, SignMode sign_mode, const SignVector* oracle,
                                     std::int64_t n1, std::int64_t n2, AllocationMode mode, std::int64_t trials,
                                     std::uint64_t seed);

struct SinglePauliRow {
  double mu = 0.0;
  std::int64_t n1 = 0;
  std::string method;
  double exp_b = 0.0;
  double bias = 0.0;
  double stddev = 0.0;
};

/**
 * b-moments for a single Pauli string with expectation mu (q = (1+mu^2)/2)
 * at each N1. Methods: exact, saddle, asymptotic, and mc:<trials>.
 */
std::vector<SinglePauliRow> run_single_pauli_sweep(const std::vector<double>& mus, const std::vector<std::int64_t>& n1_grid,
                                                   const std::vector<EvalMethod>& methods, std::uint64_t seed,
                                                   bool include_asymptotic = false);

/// Least-squares slope of log10(y) against log10(x) over x in [lo, hi].
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y, double lo, double hi);

/// CSV header line of molecular sweeps.
std::string_view sweep_csv_header();
std::string format_sweep_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> parse_sweep_csv(std::string_view text);

std::string format_single_pauli_csv(const std::vector<SinglePauliRow>& rows);

/// Writes the CSV to `path` and a JSON sidecar (config, seeds, problem
/// summary, chemical-accuracy line) to `path` + ".json".
void emit_report(const MolecularSweep& sweep, const ExperimentConfig& config, const std::filesystem::path& path);
void emit_single_pauli_report(const std::vector<SinglePauliRow>& rows, const std::vector<double>& mus,
                              const std::vector<std::int64_t>& n1_grid, std::uint64_t seed,
                              const std::filesystem::path& path);
std::vector<SweepRow> read_report(const std::filesystem::path& path);

}  // namespace bellsample
