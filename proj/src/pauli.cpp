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

#include "bellsample/pauli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "bellsample/error.hpp"
#include "text_util.hpp"

namespace bellsample {

namespace {

std::uint64_t low_bits(int n) { return n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1; }

void check_qubit_count(int n) {
  if (n < 1 || n > PauliString::kMaxQubits) {
    throw Error("qubit count must be in [1, 64], got " + std::to_string(n));
  }
}

}  // namespace

char to_char(PauliLetter letter) {
  static constexpr char kChars[] = {'I', 'X', 'Z', 'Y'};
  return kChars[static_cast<int>(letter)];
}

PauliString::PauliString(int n) : n_(n) { check_qubit_count(n); }

PauliString::PauliString(int n, std::uint64_t x_mask, std::uint64_t z_mask)
    : n_(n), x_(x_mask), z_(z_mask) {
  check_qubit_count(n);
  if (((x_ | z_) & ~low_bits(n)) != 0) {
    throw Error("Pauli masks exceed " + std::to_string(n) + " qubits");
  }
}

PauliString PauliString::from_word(std::string_view word) {
  PauliString p(static_cast<int>(word.size()));
  for (int k = 0; k < p.n_; ++k) {
    switch (word[k]) {
      case 'I': break;
      case 'X': p.set_letter(k, PauliLetter::X); break;
      case 'Y': p.set_letter(k, PauliLetter::Y); break;
      case 'Z': p.set_letter(k, PauliLetter::Z); break;
      default: throw Error(std::string("invalid Pauli letter '") + word[k] + "'");
    }
  }
  return p;
}

PauliLetter PauliString::letter(int k) const {
  if (k < 0 || k >= n_) {
    throw std::out_of_range("qubit index " + std::to_string(k) + " out of range for " +
                            std::to_string(n_) + " qubits");
  }
  const unsigned bits = static_cast<unsigned>((x_ >> k) & 1U) | static_cast<unsigned>(((z_ >> k) & 1U) << 1);
  return static_cast<PauliLetter>(bits);
}

void PauliString::set_letter(int k, PauliLetter letter) {
  if (k < 0 || k >= n_) throw std::out_of_range("qubit index out of range");
  const std::uint64_t bit = std::uint64_t{1} << k;
  const auto code = static_cast<unsigned>(letter);
  x_ = (code & 1U) ? (x_ | bit) : (x_ & ~bit);
  z_ = (code & 2U) ? (z_ | bit) : (z_ & ~bit);
}

std::string PauliString::word() const {
  std::string out(static_cast<std::size_t>(n_), 'I');
  for (int k = 0; k < n_; ++k) out[k] = to_char(letter(k));
  return out;
}

std::string PauliString::factors() const {
  std::string out;
  for (int k = 0; k < n_; ++k) {
    const PauliLetter l = letter(k);
    if (l == PauliLetter::I) continue;
    if (!out.empty()) out += ' ';
    out += to_char(l);
    out += std::to_string(k);
  }
  return out;
}

PauliLetter single_pair_letters(const PauliString& p, int k) { return p.letter(k); }

bool qubit_wise_commutes(const PauliString& p, const PauliString& q) {
  if (p.num_qubits() != q.num_qubits()) throw Error("qubit_wise_commutes: mismatched qubit counts");
  const std::uint64_t both = (p.x_mask() | p.z_mask()) & (q.x_mask() | q.z_mask());
  return ((p.x_mask() ^ q.x_mask()) & both) == 0 && ((p.z_mask() ^ q.z_mask()) & both) == 0;
}

bool commutes(const PauliString& p, const PauliString& q) {
  if (p.num_qubits() != q.num_qubits()) throw Error("commutes: mismatched qubit counts");
  const int s = std::popcount(p.x_mask() & q.z_mask()) + std::popcount(p.z_mask() & q.x_mask());
  return (s & 1) == 0;
}

PauliProduct multiply(const PauliString& p, const PauliString& q) {
  if (p.num_qubits() != q.num_qubits()) throw Error("multiply: mismatched qubit counts");
  PauliString r(p.num_qubits(), p.x_mask() ^ q.x_mask(), p.z_mask() ^ q.z_mask());
  // X^a Z^b X^c Z^d = (-1)^{|b & c|} X^{a^c} Z^{b^d}
  const int phase = p.num_y() + q.num_y() - r.num_y() + 2 * std::popcount(p.z_mask() & q.x_mask());
  return {((phase % 4) + 4) % 4, r};
}

PauliHamiltonian::PauliHamiltonian(int n, std::vector<PauliTerm> terms, double constant)
    : n_(n), constant_(constant) {
  check_qubit_count(n);
  if (!std::isfinite(constant)) throw Error("non-finite constant term");
  std::map<PauliString, double> merged;
  for (const auto& t : terms) {
    if (t.string.num_qubits() != n) throw Error("term acts on a different number of qubits");
    if (!std::isfinite(t.coefficient)) throw Error("non-finite coefficient");
    if (t.string.is_identity()) {
      constant_ += t.coefficient;
    } else {
      merged[t.string] += t.coefficient;
    }
  }
  terms_.reserve(merged.size());
  for (const auto& [s, c] : merged) terms_.push_back({c, s});
}

double PauliHamiltonian::l1_norm() const {
  double s = 0.0;
  for (const auto& t : terms_) s += std::abs(t.coefficient);
  return s;
}

bool PauliHamiltonian::is_real() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const PauliTerm& t) { return t.string.num_y() % 2 == 0; });
}

PauliString parse_factors(std::span<const std::string_view> factors, int n, std::size_t line) {
  PauliString p(n);
  for (std::string_view f : factors) {
    if (f.size() < 2) throw ParseError(line, "malformed factor '" + std::string(f) + "'");
    PauliLetter letter;
    switch (f[0]) {
      case 'X': letter = PauliLetter::X; break;
      case 'Y': letter = PauliLetter::Y; break;
      case 'Z': letter = PauliLetter::Z; break;
      default: throw ParseError(line, "unknown Pauli letter in '" + std::string(f) + "'");
    }
    int k = -1;
    const auto* end = f.data() + f.size();
    auto [ptr, ec] = std::from_chars(f.data() + 1, end, k);
    if (ec != std::errc() || ptr != end) throw ParseError(line, "bad qubit index in '" + std::string(f) + "'");
    if (k < 0 || k >= n) {
      throw ParseError(line, "qubit index " + std::to_string(k) + " outside declared " + std::to_string(n) + " qubits");
    }
    if (p.letter(k) != PauliLetter::I) throw ParseError(line, "qubit " + std::to_string(k) + " appears twice");
    p.set_letter(k, letter);
  }
  return p;
}

PauliHamiltonian parse_hamiltonian(std::string_view text) {
  int n = 0;
  std::vector<PauliTerm> terms;
  double constant = 0.0;
  std::size_t lineno = 0;
  for (std::string_view line : detail::split_lines(text)) {
    ++lineno;
    const auto tokens = detail::split_ws(line);
    if (tokens.empty() || tokens[0].front() == '#') continue;
    if (tokens[0] == "qubits") {
      if (n != 0) throw ParseError(lineno, "duplicate 'qubits' header");
      if (tokens.size() != 2) throw ParseError(lineno, "expected 'qubits N'");
      const auto v = detail::parse_int(tokens[1]);
      if (!v || *v < 1 || *v > PauliString::kMaxQubits) throw ParseError(lineno, "invalid qubit count");
      n = static_cast<int>(*v);
      continue;
    }
    if (n == 0) throw ParseError(lineno, "term before 'qubits N' header");
    const auto c = detail::parse_double(tokens[0]);
    if (!c) throw ParseError(lineno, "invalid coefficient '" + std::string(tokens[0]) + "'");
    if (!std::isfinite(*c)) throw ParseError(lineno, "non-finite coefficient");
    if (tokens.size() == 1) {
      constant += *c;
      continue;
    }
    terms.push_back({*c, parse_factors(std::span(tokens).subspan(1), n, lineno)});
  }
  if (n == 0) throw ParseError(lineno, "missing 'qubits N' header");
  return PauliHamiltonian(n, std::move(terms), constant);
}

PauliHamiltonian load_hamiltonian(const std::filesystem::path& path) {
  return parse_hamiltonian(detail::read_file(path));
}

std::string serialize(const PauliHamiltonian& h) {
  std::ostringstream os;
  os << "qubits " << h.num_qubits() << '\n';
  if (h.constant() != 0.0) os << detail::format_double(h.constant()) << '\n';
  for (const auto& t : h.terms()) {
    os << detail::format_double(t.coefficient) << ' ' << t.string.factors() << '\n';
  }
  return os.str();
}

Grouping qwc_grouping(const PauliHamiltonian& h) {
  if (h.size() == 0) throw Error("qwc_grouping: Hamiltonian has no non-identity terms");
  const auto terms = h.terms();
  std::vector<std::size_t> order(terms.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(terms[a].coefficient) > std::abs(terms[b].coefficient);
  });

  Grouping g;
  g.group_of.assign(terms.size(), 0);
  // Per group: union of supports and the letter on each supported qubit.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> basis;  // (x, z) of the merged string
  for (std::size_t i : order) {
    const auto& p = terms[i].string;
    std::size_t target = g.groups.size();
    for (std::size_t k = 0; k < basis.size(); ++k) {
      if (qubit_wise_commutes(p, PauliString(h.num_qubits(), basis[k].first, basis[k].second))) {
        target = k;
        break;
      }
    }
    if (target == g.groups.size()) {
      g.groups.emplace_back();
      basis.emplace_back(0, 0);
    }
    g.groups[target].push_back(i);
    basis[target].first |= p.x_mask();
    basis[target].second |= p.z_mask();
    g.group_of[i] = target;
  }

  const double total = h.l1_norm();
  g.weights.reserve(g.groups.size());
  for (const auto& grp : g.groups) {
    double w = 0.0;
    for (std::size_t i : grp) w += std::abs(terms[i].coefficient);
    g.weights.push_back(total > 0.0 ? w / total : 1.0 / static_cast<double>(g.groups.size()));
  }
  return g;
}

std::string validate_grouping(const PauliHamiltonian& h, const Grouping& g) {
  std::vector<int> seen(h.size(), 0);
  if (g.weights.size() != g.groups.size()) return "weights and groups differ in length";
  for (std::size_t k = 0; k < g.groups.size(); ++k) {
    const auto& grp = g.groups[k];
    for (std::size_t a = 0; a < grp.size(); ++a) {
      if (grp[a] >= h.size()) return "term index out of range";
      ++seen[grp[a]];
      for (std::size_t b = a + 1; b < grp.size(); ++b) {
        if (!qubit_wise_commutes(h.term(grp[a]).string, h.term(grp[b]).string)) {
          return "group " + std::to_string(k) + " holds non-QWC terms " + std::to_string(grp[a]) + ", " +
                 std::to_string(grp[b]);
        }
      }
    }
    if (g.weights[k] < 0.0) return "negative weight";
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (seen[i] != 1) return "term " + std::to_string(i) + " appears " + std::to_string(seen[i]) + " times";
  }
  const double wsum = std::accumulate(g.weights.begin(), g.weights.end(), 0.0);
  if (std::abs(wsum - 1.0) > 1e-12) return "weights sum to " + detail::format_double(wsum);
  return {};
}

}  // namespace bellsample
