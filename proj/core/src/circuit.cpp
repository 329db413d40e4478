// Copyright 2026 The qcharge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qcharge/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "qcharge/error.hpp"
#include "qcharge/shunted.hpp"

namespace qcharge {

const char* to_string(Parity p) { return p == Parity::odd ? "odd" : "even"; }

Parity parse_parity(const std::string& s) {
  if (s == "even") return Parity::even;
  if (s == "odd") return Parity::odd;
  throw InvalidArgument("parity must be 'even' or 'odd', got '" + s + "'");
}

void CircuitParams::validate() const {
  if (!(std::isfinite(e_c) && e_c > 0.0)) throw InvalidArgument("e_c must be positive and finite");
  if (e_j.empty()) throw InvalidArgument("e_j needs at least the first harmonic");
  // E_J1 = 0 is allowed: it is the free charge-ladder limit.
  if (!(std::isfinite(e_j[0]) && e_j[0] >= 0.0)) throw InvalidArgument("e_j[1] must be >= 0");
  for (double v : e_j)
    if (!std::isfinite(v)) throw InvalidArgument("e_j entries must be finite");
  if (!(std::isfinite(e_l) && e_l >= 0.0)) throw InvalidArgument("e_l must be >= 0");
  if (!std::isfinite(n_g)) throw InvalidArgument("n_g must be finite");
  if (!std::isfinite(phi_ext)) throw InvalidArgument("phi_ext must be finite");
}

void SolverConfig::validate() const {
  if (charge_cutoff < 1) throw InvalidArgument("charge_cutoff must be >= 1");
  if (osc_dim < 50) throw InvalidArgument("osc_dim must be >= 50");
  if (!(conv_tol > 0.0)) throw InvalidArgument("conv_tol must be positive");
  if (n_levels < 2) throw InvalidArgument("n_levels must be >= 2");
}

void TransitionSet::validate() const {
  std::set<std::tuple<int, int, int, double>> keys;
  for (const auto& t : entries) {
    if (!(t.lower >= 0 && t.lower < t.upper))
      throw InvalidArgument("transition levels must satisfy 0 <= lower < upper");
    if (!std::isfinite(t.freq_ghz)) throw InvalidArgument("transition frequency not finite");
    if (provenance == Provenance::measured ? !(t.freq_ghz > 0.0) : t.freq_ghz < 0.0)
      throw InvalidArgument("transition frequency must be positive");
    if (!keys.emplace(t.lower, t.upper, static_cast<int>(t.parity), t.n_g).second) {
      std::ostringstream os;
      os << "duplicate transition (" << t.lower << "," << t.upper << "," << to_string(t.parity)
         << ",n_g=" << t.n_g << ")";
      throw InvalidArgument(os.str());
    }
  }
}

double TransitionSet::frequency(int lower, int upper, Parity parity, double n_g) const {
  for (const auto& t : entries)
    if (t.lower == lower && t.upper == upper && t.parity == parity && t.n_g == n_g) return t.freq_ghz;
  std::ostringstream os;
  os << "no transition (" << lower << "," << upper << "," << to_string(parity) << ",n_g=" << n_g
     << ") in set";
  throw InvalidArgument(os.str());
}

Eigen::MatrixXd build_charge_hamiltonian(const CircuitParams& params, const SolverConfig& config) {
  params.validate();
  if (params.e_l != 0.0)
    throw InvalidArgument("charge basis needs e_l = 0; use the shunted solver for e_l > 0");
  const int nc = config.charge_cutoff;
  if (nc < 1) throw InvalidArgument("charge_cutoff must be >= 1");
  if (params.harmonic_order() > nc)
    throw InvalidArgument("harmonic order exceeds charge_cutoff");
  const int dim = 2 * nc + 1;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  const double shift = params.n_g + params.parity_offset();
  for (int i = 0; i < dim; ++i) {
    const double q = (i - nc) - shift;
    h(i, i) = 4.0 * params.e_c * q * q;
  }
  for (int k = 1; k <= params.harmonic_order(); ++k) {
    const double v = -0.5 * params.e_j[k - 1];
    for (int i = 0; i + k < dim; ++i) {
      h(i, i + k) = v;
      h(i + k, i) = v;
    }
  }
  return h;
}

Eigen::VectorXd charge_levels(const CircuitParams& params, int charge_cutoff, int count) {
  SolverConfig cfg;
  cfg.charge_cutoff = charge_cutoff;
  const Eigen::MatrixXd h = build_charge_hamiltonian(params, cfg);
  if (count > h.rows()) throw InvalidArgument("requested more levels than basis states");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ConvergenceError("charge-basis eigensolver failed", 0.0);
  return es.eigenvalues().head(count);
}

namespace {

Eigen::VectorXd gaps(const Eigen::VectorXd& levels) {
  Eigen::VectorXd g(levels.size() - 1);
  for (Eigen::Index i = 0; i + 1 < levels.size(); ++i) g(i) = levels(i + 1) - levels(i);
  return g;
}

double max_relative_change(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double scale) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a(i) - b(i)) / std::max(std::abs(b(i)), scale));
  return worst;
}

TransitionSet charge_transitions(const CircuitParams& params, const SolverConfig& config) {
  const int n = config.n_levels;
  if (config.charge_cutoff < 5 + params.harmonic_order())
    throw InvalidArgument("charge_cutoff must be >= 5 + harmonic order");
  int nc = config.charge_cutoff;
  Eigen::VectorXd coarse = charge_levels(params, nc, n);
  double achieved = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt < 2; ++attempt) {
    const Eigen::VectorXd fine = charge_levels(params, 2 * nc, n);
    achieved = max_relative_change(gaps(coarse), gaps(fine), params.e_c);
    if (achieved < config.conv_tol) {
      TransitionSet out;
      out.provenance = Provenance::predicted;
      const Eigen::VectorXd g = gaps(fine);
      const double norm = 4.0 * params.e_c * (2.0 * nc + 1.0) * (2.0 * nc + 1.0);
      const double degenerate = 10.0 * std::numeric_limits<double>::epsilon() * norm;
      for (int i = 0; i + 1 < n; ++i) {
        out.entries.push_back({i, i + 1, g(i), params.parity, params.n_g});
        if (std::abs(g(i)) <= degenerate) {
          std::ostringstream os;
          os << "levels " << i << "," << i + 1 << " degenerate; reported in ascending order";
          out.notes.push_back(os.str());
        }
      }
      return out;
    }
    coarse = fine;
    nc *= 2;
  }
  std::ostringstream os;
  os << "charge basis not converged at N_c=" << nc << " (relative change " << achieved << ")";
  throw ConvergenceError(os.str(), achieved);
}

}  // namespace

TransitionSet transition_frequencies(const CircuitParams& params, const SolverConfig& config) {
  params.validate();
  config.validate();
  if (params.e_l > 0.0) return shunted_transitions(params, config);
  return charge_transitions(params, config);
}

double charge_dispersion(const CircuitParams& params, const SolverConfig& config, int level) {
  if (params.e_l != 0.0) throw InvalidArgument("charge dispersion needs e_l = 0");
  if (level < 0 || level >= config.n_levels - 1)
    throw InvalidArgument("level index must be in [0, n_levels - 2]");
  CircuitParams p = params;
  p.n_g = 0.0;
  p.parity = Parity::even;
  const double even = transition_frequencies(p, config).entries[level].freq_ghz;
  p.parity = Parity::odd;
  const double odd = transition_frequencies(p, config).entries[level].freq_ghz;
  return std::abs(even - odd);
}

PerturbativeResult perturbative_transition(const CircuitParams& params, int level, double phi_ext,
                                           const SolverConfig& config) {
  params.validate();
  if (level < 0) throw InvalidArgument("level index must be >= 0");
  const double e_j = params.e_j[0];
  if (!(e_j > 0.0)) throw InvalidArgument("perturbative formula needs e_j[1] > 0");
  CircuitParams single;
  single.e_c = params.e_c;
  single.e_j = {e_j};
  SolverConfig cfg = config;
  cfg.n_levels = std::max(cfg.n_levels, level + 2);
  PerturbativeResult out;
  out.freq_ghz = transition_frequencies(single, cfg).entries[level].freq_ghz;
  const double el = params.e_l;
  out.freq_ghz += el * std::sqrt(2.0 * params.e_c / e_j) *
                  (1.0 - (level + 1) * el / (4.0 * e_j) - phi_ext * phi_ext * el / (4.0 * e_j));
  out.outside_validity = el / e_j >= 0.05;
  return out;
}

double flux_shift_estimate(double e_l, double e_j, double f01, double phi_ext) {
  if (!(e_j > 0.0)) throw InvalidArgument("e_j must be positive");
  const double r = e_l / e_j;
  return phi_ext * phi_ext / 8.0 * r * r * f01;
}

}  // namespace qcharge
