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

// bellsample: sweep runner.
//
//   bellsample single-pauli --mu 0,0.5,0.9 --method exact --out fig.csv
//   bellsample molecule --hamiltonian data/h4.ham --signs sampled --method mc:100 --out h4.csv
//   bellsample baseline --hamiltonian data/h2.ham --out h2_qwc.csv

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "bellsample/error.hpp"
#include "bellsample/experiment.hpp"
#include "bellsample/kernels.hpp"

namespace {

std::vector<double> parse_mu_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find(',', start);
    const auto tok = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw bellsample::Error("bad mu value '" + tok + "'");
    }
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

std::vector<bellsample::EvalMethod> parse_methods(const std::string& text) {
  std::vector<bellsample::EvalMethod> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find(',', start);
    out.push_back(bellsample::EvalMethod::parse(text.substr(start, end == std::string::npos ? std::string::npos : end - start)));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

void write_or_print(const std::string& csv, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << csv;
    return;
  }
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f || !(f << csv)) throw bellsample::Error("cannot write " + out);
}

}  // namespace

int main(int argc, char** argv) {
  bellsample::configure_workers_from_env();
  CLI::App app{"Bell-sampling expectation-value estimation: moment sweeps and grouped-measurement baselines"};
  app.require_subcommand(1);
  app.footer("Worker count: BELLSAMPLE_NUM_THREADS (default: OpenMP runtime).");

  std::string grid_text;
  std::string method_text;
  std::uint64_t seed = 0;
  std::string out;

  auto* single = app.add_subcommand("single-pauli", "moments of |<P>| estimates for given <P> values");
  std::string mu_text = "0,0.5,0.9";
  bool asymptotic = false;
  single->add_option("--mu", mu_text, "comma-separated <P> values")->capture_default_str();
  single->add_option("--n1-grid", grid_text, "N1 values: a,b,c or log:<lo>:<hi>:<per-decade>");
  single->add_option("--method", method_text, "comma-separated: exact, saddle, mc:<trials>");
  single->add_flag("--asymptotic", asymptotic, "add closed-form asymptotic rows");
  single->add_option("--seed", seed, "RNG seed");
  single->add_option("--out", out, "CSV path (JSON sidecar written next to it); stdout if omitted");

  auto* molecule = app.add_subcommand("molecule", "bias and std of the energy estimate against QWC baselines");
  std::string ham;
  std::string signs = "exact";
  std::string grouping = "wds";
  double n2_ratio = 5.0;
  double pair_cutoff = 0.0;
  molecule->add_option("--hamiltonian", ham, "Hamiltonian file")->required()->check(CLI::ExistingFile);
  molecule->add_option("--signs", signs, "exact | oracle:<path> | sampled")->capture_default_str();
  molecule->add_option("--n1-grid", grid_text, "N1 values: a,b,c or log:<lo>:<hi>:<per-decade>");
  molecule->add_option("--n2-ratio", n2_ratio, "N2 / N1 for sampled signs")->capture_default_str();
  molecule->add_option("--grouping", grouping, "wds | wrs allocation of sign shots")->capture_default_str();
  molecule->add_option("--method", method_text, "exact | saddle | mc:<trials> (default saddle)");
  molecule->add_option("--pair-cutoff", pair_cutoff, "skip pairs with |c_i c_j| below this")->capture_default_str();
  molecule->add_option("--seed", seed, "RNG seed");
  molecule->add_option("--out", out, "CSV path (JSON sidecar written next to it); stdout if omitted");

  auto* baseline = app.add_subcommand("baseline", "grouped-measurement standard deviations at 2*N1 shots");
  baseline->add_option("--hamiltonian", ham, "Hamiltonian file")->required()->check(CLI::ExistingFile);
  baseline->add_option("--n1-grid", grid_text, "N1 values: a,b,c or log:<lo>:<hi>:<per-decade>");
  baseline->add_option("--out", out, "CSV path; stdout if omitted");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto grid = grid_text.empty() ? bellsample::default_n1_grid() : bellsample::parse_n1_grid(grid_text);
    if (single->parsed()) {
      const auto mus = parse_mu_list(mu_text);
      const auto methods = parse_methods(method_text.empty() ? "exact,saddle" : method_text);
      const auto rows = bellsample::run_single_pauli_sweep(mus, grid, methods, seed, asymptotic);
      if (out.empty() || out == "-") {
        std::cout << bellsample::format_single_pauli_csv(rows);
      } else {
        bellsample::emit_single_pauli_report(rows, mus, grid, seed, out);
      }
    } else if (molecule->parsed()) {
      bellsample::ExperimentConfig cfg;
      cfg.hamiltonian_path = ham;
      cfg.set_sign_mode(signs);
      cfg.n1_grid = grid;
      cfg.n2_ratio = n2_ratio;
      cfg.grouping_mode = bellsample::parse_allocation_mode(grouping);
      if (!method_text.empty()) cfg.method = bellsample::EvalMethod::parse(method_text);
      cfg.seed = seed;
      cfg.pair_cutoff = pair_cutoff;
      cfg.output_path = out;
      const auto sweep = bellsample::run_molecular_sweep(cfg);
      for (const auto& w : sweep.warnings) std::cerr << "warning: " << w << "\n";
      if (out.empty() || out == "-") {
        std::cout << bellsample::format_sweep_csv(sweep.rows);
      } else {
        bellsample::emit_report(sweep, cfg, out);
      }
    } else if (baseline->parsed()) {
      const auto problem = bellsample::MolecularProblem::from_hamiltonian(bellsample::load_hamiltonian(ham));
      const double wds = bellsample::qwc_baseline_std(problem.h, problem.state, problem.grouping,
                                                      bellsample::AllocationMode::WDS, 1);
      const double wrs = bellsample::qwc_baseline_std(problem.h, problem.state, problem.grouping,
                                                      bellsample::AllocationMode::WRS, 1);
      std::string csv = "n1,shots,groups,qwc_wds_std,qwc_wrs_std\n";
      for (auto n1 : grid) {
        const double scale = 1.0 / std::sqrt(2.0 * static_cast<double>(n1));
        char buf[160];
        std::snprintf(buf, sizeof buf, "%lld,%lld,%zu,%.17e,%.17e\n", static_cast<long long>(n1),
                      static_cast<long long>(2 * n1), problem.grouping.size(), wds * scale, wrs * scale);
        csv += buf;
      }
      write_or_print(csv, out);
    }
  } catch (const std::exception& e) {
    std::cerr << "bellsample: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
