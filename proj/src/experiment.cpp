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

#include "bellsample/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numeric>

#include "bellsample/bell_sampler.hpp"
#include "bellsample/error.hpp"
#include "bellsample/kernels.hpp"
#include "bellsample/rng.hpp"
#include "text_util.hpp"

namespace bellsample {

namespace {

constexpr std::string_view kSweepHeader = "n1,n2,bias,bias_sign,std,qwc_wds_std,qwc_wrs_std,method,trials,bias_stderr";
constexpr std::string_view kSinglePauliHeader = "mu,n1,method,exp_b,bias,std";

std::vector<std::string_view> split_on(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = text.find(sep, start);
    out.push_back(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

std::int64_t parse_count(std::string_view tok) {
  const auto v = detail::parse_double(tok);
  if (!v || !(*v >= 1.0) || *v > 9.0e15 || std::floor(*v) != *v) {
    throw Error("'" + std::string(tok) + "' is not a positive integer");
  }
  return static_cast<std::int64_t>(*v);
}

std::string_view to_string(SignMode m) {
  switch (m) {
    case SignMode::Exact: return "exact";
    case SignMode::Oracle: return "oracle";
    case SignMode::Sampled: return "sampled";
  }
  return "exact";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write to " + path.string() + " failed");
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  auto p = path;
  p += ".json";
  return p;
}

double sample_std(std::span<const double> v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

EvalMethod EvalMethod::parse(std::string_view text) {
  EvalMethod m;
  if (text == "exact") {
    m.kind = Kind::Exact;
  } else if (text == "saddle") {
    m.kind = Kind::Saddle;
  } else if (text == "mc") {
    m.kind = Kind::MonteCarlo;
  } else if (text.starts_with("mc:")) {
    m.kind = Kind::MonteCarlo;
    m.trials = parse_count(text.substr(3));
  } else {
    throw Error("unknown method '" + std::string(text) + "' (expected exact, saddle or mc:<trials>)");
  }
  return m;
}

std::string EvalMethod::tag() const {
  switch (kind) {
    case Kind::Exact: return "exact";
    case Kind::Saddle: return "saddle";
    case Kind::MonteCarlo: return "mc:" + std::to_string(trials);
  }
  return "saddle";
}

std::vector<std::int64_t> default_n1_grid() { return parse_n1_grid("log:1e1:1e7:4"); }

std::vector<std::int64_t> parse_n1_grid(std::string_view text) {
  std::vector<std::int64_t> grid;
  if (text.starts_with("log:")) {
    const auto parts = split_on(text.substr(4), ':');
    if (parts.size() != 3) throw Error("log grid must be log:<lo>:<hi>:<points-per-decade>");
    const double lo = static_cast<double>(parse_count(parts[0]));
    const double hi = static_cast<double>(parse_count(parts[1]));
    const double per = static_cast<double>(parse_count(parts[2]));
    const double span = std::log10(hi) - std::log10(lo);
    const auto steps = static_cast<std::int64_t>(std::floor(span * per + 1e-9));
    for (std::int64_t k = 0; k <= steps; ++k) {
      const auto v = std::llround(std::pow(10.0, std::log10(lo) + static_cast<double>(k) / per));
      if (grid.empty() || v > grid.back()) grid.push_back(v);
    }
  } else {
    for (auto tok : split_on(text, ',')) grid.push_back(parse_count(tok));
  }
  if (grid.empty()) throw Error("empty N1 grid");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (grid[k] <= grid[k - 1]) throw Error("N1 grid must be strictly increasing");
  }
  return grid;
}

void ExperimentConfig::validate() const {
  if (n1_grid.empty()) throw Error("N1 grid is empty");
  for (std::size_t k = 0; k < n1_grid.size(); ++k) {
    if (n1_grid[k] < 1) throw Error("N1 grid entries must be positive");
    if (k > 0 && n1_grid[k] <= n1_grid[k - 1]) throw Error("N1 grid must be strictly increasing");
  }
  if (!(n2_ratio > 0.0) || !std::isfinite(n2_ratio)) throw Error("n2 ratio must be positive");
  if (method.kind == EvalMethod::Kind::MonteCarlo && method.trials < 1) throw Error("Monte Carlo needs at least one trial");
  if (sign_mode == SignMode::Oracle && oracle_path.empty()) throw Error("oracle sign mode needs a file");
  if (!(pair_cutoff >= 0.0)) throw Error("pair cutoff must be non-negative");
}

void ExperimentConfig::set_sign_mode(std::string_view text) {
  if (text == "exact") {
    sign_mode = SignMode::Exact;
  } else if (text == "sampled") {
    sign_mode = SignMode::Sampled;
  } else if (text.starts_with("oracle:") && text.size() > 7) {
    sign_mode = SignMode::Oracle;
    oracle_path = std::string(text.substr(7));
  } else {
    throw Error("unknown sign mode '" + std::string(text) + "' (expected exact, oracle:<path> or sampled)");
  }
}

MolecularProblem MolecularProblem::from_hamiltonian(PauliHamiltonian h) {
  auto gs = ground_state(h);
  auto grouping = qwc_grouping(h);
  return {std::move(h), std::move(gs.state), gs.energy, std::move(grouping)};
}

MonteCarloMoments monte_carlo_energy(const MolecularProblem& problem, SignMode sign_mode, const SignVector* oracle,
                                     std::int64_t n1, std::int64_t n2, AllocationMode mode, std::int64_t trials,
                                     std::uint64_t seed) {
  if (trials < 1) throw Error("monte_carlo_energy: need at least one trial");
  const auto& h = problem.h;
  const BellDistribution dist(problem.state);
  const double target = energy(problem.state, h);

  std::vector<int> fixed;
  if (sign_mode == SignMode::Exact) fixed = exact_signs(problem.state, h).signs;
  if (sign_mode == SignMode::Oracle) {
    if (!oracle || oracle->size() != h.size()) throw Error("monte_carlo_energy: oracle signs missing or mismatched");
    fixed = oracle->signs;
  }
  std::vector<GroupMeasurement> groups;
  ShotAllocation wds;
  if (sign_mode == SignMode::Sampled) {
    if (n2 < 1) throw Error("monte_carlo_energy: sampled signs need N2 >= 1");
    groups.reserve(problem.grouping.size());
    for (const auto& g : problem.grouping.groups) groups.emplace_back(problem.state, h, g);
    if (mode == AllocationMode::WDS) wds = allocate_shots(problem.grouping, n2, AllocationMode::WDS, seed);
  }

  std::vector<double> energies(static_cast<std::size_t>(trials));
  kernels::for_each_index(energies.size(), [&](std::size_t t) {
    const std::uint64_t trial_seed = derive_seed(seed, t);
    const auto counts = dist.sample(n1, derive_seed(trial_seed, 0));
    const auto est = estimate_abs(counts, h);
    std::vector<int> sampled;
    if (sign_mode == SignMode::Sampled) {
      const auto alloc = mode == AllocationMode::WDS
                             ? wds
                             : allocate_shots(problem.grouping, n2, AllocationMode::WRS, derive_seed(trial_seed, 1));
      std::vector<std::vector<TermTally>> tallies(groups.size());
      for (std::size_t g = 0; g < groups.size(); ++g) {
        tallies[g] = groups[g].sample(alloc.per_group[g], derive_seed(trial_seed, 2 + g));
      }
      sampled = estimate_signs(tallies, problem.grouping, alloc).signs;
    }
    const auto& s = sign_mode == SignMode::Sampled ? sampled : fixed;
    double e = h.constant();
    for (std::size_t i = 0; i < h.size(); ++i) e += h.term(i).coefficient * s[i] * est[i].b_hat;
    energies[t] = e;
  });

  MonteCarloMoments out;
  out.mean = std::accumulate(energies.begin(), energies.end(), 0.0) / static_cast<double>(trials);
  out.bias = out.mean - target;
  out.stddev = sample_std(energies, out.mean);
  out.bias_stderr = out.stddev / std::sqrt(static_cast<double>(trials));
  return out;
}

MolecularSweep run_molecular_sweep(const MolecularProblem& problem, const ExperimentConfig& config,
                                   const SignVector* oracle) {
  config.validate();
  const auto& h = problem.h;
  MolecularSweep sweep;
  sweep.num_qubits = h.num_qubits();
  sweep.num_terms = h.size();
  sweep.num_groups = problem.grouping.size();
  sweep.ground_energy = problem.energy;
  if (config.sign_mode == SignMode::Oracle) {
    if (!oracle) throw Error("oracle sign mode needs oracle signs");
    if (oracle->size() != h.size()) throw Error("sign oracle does not match the Hamiltonian");
    sweep.warnings = oracle->warnings;
  }

  const double wds_unit = qwc_baseline_std(h, problem.state, problem.grouping, AllocationMode::WDS, 1);
  const double wrs_unit = qwc_baseline_std(h, problem.state, problem.grouping, AllocationMode::WRS, 1);

  for (std::size_t r = 0; r < config.n1_grid.size(); ++r) {
    const std::int64_t n1 = config.n1_grid[r];
    const std::uint64_t row_seed = derive_seed(config.seed, r);
    SweepRow row;
    row.n1 = n1;
    row.n2 = config.sign_mode == SignMode::Sampled
                 ? std::max<std::int64_t>(1, std::llround(config.n2_ratio * static_cast<double>(n1)))
                 : 0;
    row.method = config.method.tag();
    if (config.method.kind == EvalMethod::Kind::MonteCarlo) {
      const auto mc = monte_carlo_energy(problem, config.sign_mode, oracle, n1, row.n2, config.grouping_mode,
                                         config.method.trials, row_seed);
      row.bias = mc.bias;
      row.stddev = mc.stddev;
      row.trials = config.method.trials;
      row.bias_stderr = mc.bias_stderr;
    } else {
      MomentConfig mc;
      mc.n1 = n1;
      mc.method = config.method.kind == EvalMethod::Kind::Exact ? MomentMethod::Exact : MomentMethod::Saddle;
      mc.pair_cutoff = config.pair_cutoff;
      SignSource src;
      switch (config.sign_mode) {
        case SignMode::Exact: src = SignSource::exact(); break;
        case SignMode::Oracle: src = SignSource::from_vector(*oracle); break;
        case SignMode::Sampled:
          if (config.grouping_mode != AllocationMode::WDS) {
            throw Error("analytic moments with sampled signs need WDS allocation; use mc:<trials> for WRS");
          }
          src = SignSource::sampled(problem.grouping,
                                    allocate_shots(problem.grouping, row.n2, AllocationMode::WDS, row_seed));
          break;
      }
      const auto rep = assemble_bias_variance(h, problem.state, src, mc);
      row.bias = rep.bias;
      row.stddev = rep.stddev;
    }
    row.bias_sign = row.bias < 0.0 ? '-' : '+';
    const double scale = 1.0 / std::sqrt(2.0 * static_cast<double>(n1));
    row.qwc_wds_std = wds_unit * scale;
    row.qwc_wrs_std = wrs_unit * scale;
    sweep.rows.push_back(row);
  }
  return sweep;
}

MolecularSweep run_molecular_sweep(const ExperimentConfig& config) {
  config.validate();
  auto problem = MolecularProblem::from_hamiltonian(load_hamiltonian(config.hamiltonian_path));
  if (config.sign_mode == SignMode::Oracle) {
    const auto oracle = load_sign_oracle(config.oracle_path, problem.h);
    return run_molecular_sweep(problem, config, &oracle);
  }
  return run_molecular_sweep(problem, config, nullptr);
}

std::vector<SinglePauliRow> run_single_pauli_sweep(const std::vector<double>& mus, const std::vector<std::int64_t>& n1_grid,
                                                   const std::vector<EvalMethod>& methods, std::uint64_t seed,
                                                   bool include_asymptotic) {
  for (double mu : mus) {
    if (!(mu >= -1.0 && mu <= 1.0)) throw Error("single-Pauli mu must lie in [-1, 1]");
  }
  struct Cell {
    double mu;
    std::int64_t n1;
    int method;  // index into methods, -1 for the asymptotic reference
  };
  std::vector<Cell> cells;
  for (double mu : mus) {
    for (auto n1 : n1_grid) {
      for (int k = 0; k < static_cast<int>(methods.size()); ++k) cells.push_back({mu, n1, k});
      if (include_asymptotic) cells.push_back({mu, n1, -1});
    }
  }
  std::vector<SinglePauliRow> rows(cells.size());
  kernels::for_each_index(cells.size(), [&](std::size_t c) {
    const auto& cell = cells[c];
    const double target = std::abs(cell.mu);
    const double q = (1.0 + cell.mu * cell.mu) / 2.0;
    SinglePauliRow row{cell.mu, cell.n1, "asymptotic", 0.0, 0.0, 0.0};
    if (cell.method < 0) {
      const auto a = asymptotic_reference(cell.mu * cell.mu, cell.n1);
      row.bias = a.bias;
      row.exp_b = target + a.bias;
      row.stddev = a.stddev;
      rows[c] = row;
      return;
    }
    const auto& m = methods[static_cast<std::size_t>(cell.method)];
    row.method = m.tag();
    double eb = 0.0;
    double eb2 = 0.0;
    switch (m.kind) {
      case EvalMethod::Kind::Exact:
        eb = exp_b_exact(q, cell.n1);
        eb2 = exp_b2_exact(q, cell.n1);
        break;
      case EvalMethod::Kind::Saddle: {
        const auto np = normal_params(q, cell.n1);
        eb = saddle_exp_b(np.mu, np.sigma);
        eb2 = saddle_exp_b2(np.mu, np.sigma);
        break;
      }
      case EvalMethod::Kind::MonteCarlo: {
        Rng rng(derive_seed(seed, c));
        std::vector<double> b(static_cast<std::size_t>(m.trials));
        for (auto& v : b) {
          const double a = 2.0 * static_cast<double>(rng.binomial(cell.n1, q)) / static_cast<double>(cell.n1) - 1.0;
          v = std::sqrt(std::max(0.0, a));
        }
        eb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(b.size());
        const double sd = sample_std(b, eb);
        eb2 = sd * sd + eb * eb;
        break;
      }
    }
    row.exp_b = eb;
    row.bias = eb - target;
    row.stddev = std::sqrt(std::max(0.0, eb2 - eb * eb));
    rows[c] = row;
  });
  return rows;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y, double lo, double hi) {
  if (x.size() != y.size()) throw Error("loglog_slope: length mismatch");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] < lo || x[k] > hi || !(x[k] > 0.0) || !(y[k] > 0.0)) continue;
    const double lx = std::log10(x[k]);
    const double ly = std::log10(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) throw Error("loglog_slope: fewer than two points in the window");
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw Error("loglog_slope: degenerate window");
  return (n * sxy - sx * sy) / denom;
}

std::string_view sweep_csv_header() { return kSweepHeader; }

std::string format_sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out(kSweepHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.n1) + ',' + std::to_string(r.n2) + ',' + detail::format_double(r.bias) + ',' + r.bias_sign +
           ',' + detail::format_double(r.stddev) + ',' + detail::format_double(r.qwc_wds_std) + ',' +
           detail::format_double(r.qwc_wrs_std) + ',' + r.method + ',' + std::to_string(r.trials) + ',' +
           detail::format_double(r.bias_stderr) + '\n';
  }
  return out;
}

std::vector<SweepRow> parse_sweep_csv(std::string_view text) {
  const auto lines = detail::split_lines(text);
  if (lines.empty() || lines[0] != kSweepHeader) throw ParseError(1, "unexpected sweep CSV header");
  std::vector<SweepRow> rows;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    if (lines[k].empty()) continue;
    const auto f = split_on(lines[k], ',');
    if (f.size() != 10 || f[3].size() != 1) throw ParseError(k + 1, "expected 10 fields");
    const auto num = [&](std::string_view tok) {
      const auto v = detail::parse_double(tok);
      if (!v) throw ParseError(k + 1, "bad number '" + std::string(tok) + "'");
      return *v;
    };
    const auto integer = [&](std::string_view tok) {
      const auto v = detail::parse_int(tok);
      if (!v) throw ParseError(k + 1, "bad integer '" + std::string(tok) + "'");
      return static_cast<std::int64_t>(*v);
    };
    SweepRow r;
    r.n1 = integer(f[0]);
    r.n2 = integer(f[1]);
    r.bias = num(f[2]);
    r.bias_sign = f[3][0];
    r.stddev = num(f[4]);
    r.qwc_wds_std = num(f[5]);
    r.qwc_wrs_std = num(f[6]);
    r.method = std::string(f[7]);
    r.trials = integer(f[8]);
    r.bias_stderr = num(f[9]);
    rows.push_back(r);
  }
  return rows;
}

std::string format_single_pauli_csv(const std::vector<SinglePauliRow>& rows) {
  std::string out(kSinglePauliHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += detail::format_double(r.mu) + ',' + std::to_string(r.n1) + ',' + r.method + ',' +
           detail::format_double(r.exp_b) + ',' + detail::format_double(r.bias) + ',' + detail::format_double(r.stddev) +
           '\n';
  }
  return out;
}

void emit_report(const MolecularSweep& sweep, const ExperimentConfig& config, const std::filesystem::path& path) {
  if (sweep.rows.empty()) throw Error("emit_report: no rows");
  write_text(path, format_sweep_csv(sweep.rows));
  nlohmann::ordered_json meta;
  meta["kind"] = "molecule";
  meta["hamiltonian"] = config.hamiltonian_path.string();
  meta["signs"] = std::string(to_string(config.sign_mode));
  if (config.sign_mode == SignMode::Oracle) meta["oracle"] = config.oracle_path.string();
  meta["n1_grid"] = config.n1_grid;
  meta["n2_ratio"] = config.n2_ratio;
  meta["grouping"] = std::string(to_string(config.grouping_mode));
  meta["method"] = config.method.tag();
  meta["pair_cutoff"] = config.pair_cutoff;
  meta["seed"] = config.seed;
  std::vector<std::uint64_t> row_seeds;
  for (std::size_t r = 0; r < config.n1_grid.size(); ++r) row_seeds.push_back(derive_seed(config.seed, r));
  meta["row_seeds"] = row_seeds;
  meta["num_qubits"] = sweep.num_qubits;
  meta["num_terms"] = sweep.num_terms;
  meta["num_groups"] = sweep.num_groups;
  meta["ground_energy_hartree"] = sweep.ground_energy;
  meta["qwc_shots_per_row"] = "2*n1";
  meta["chemical_accuracy_hartree"] = kChemicalAccuracyHartree;
  meta["warnings"] = sweep.warnings;
  write_text(sidecar_path(path), meta.dump(2) + "\n");
}

void emit_single_pauli_report(const std::vector<SinglePauliRow>& rows, const std::vector<double>& mus,
                              const std::vector<std::int64_t>& n1_grid, std::uint64_t seed,
                              const std::filesystem::path& path) {
  if (rows.empty()) throw Error("emit_single_pauli_report: no rows");
  write_text(path, format_single_pauli_csv(rows));
  nlohmann::ordered_json meta;
  meta["kind"] = "single-pauli";
  meta["mu"] = mus;
  meta["n1_grid"] = n1_grid;
  meta["seed"] = seed;
  meta["chemical_accuracy_hartree"] = kChemicalAccuracyHartree;
  write_text(sidecar_path(path), meta.dump(2) + "\n");
}

std::vector<SweepRow> read_report(const std::filesystem::path& path) { return parse_sweep_csv(detail::read_file(path)); }

}  // namespace bellsample
