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

#include "qcharge/shunted.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qcharge/error.hpp"
#include "qcharge/oscillator.hpp"

namespace qcharge {

namespace {

void check_shunted(const CircuitParams& params) {
  params.validate();
  if (params.e_l < kShuntValidityFloorGhz) {
    std::ostringstream os;
    os << "e_l = " << params.e_l << " GHz is below the shunted-model validity floor of "
       << kShuntValidityFloorGhz << " GHz";
    throw InvalidArgument(os.str());
  }
}

bool has_sine_terms(const CircuitParams& params) {
  for (int k = 1; k <= params.harmonic_order(); ++k)
    if (params.e_j[k - 1] != 0.0 && std::sin(k * params.phi_ext) != 0.0) return true;
  return false;
}

Eigen::MatrixXd assemble(const CircuitParams& params, const OscillatorBasis& b) {
  const int dim = b.dim;
  Eigen::MatrixXd h = 4.0 * params.e_c * b.n_zpf * b.n_zpf * oscillator::momentum_squared(dim) +
                      0.5 * params.e_l * b.phi_zpf * b.phi_zpf * oscillator::position_squared(dim);
  const bool with_sin = has_sine_terms(params);
  for (int k = 1; k <= params.harmonic_order(); ++k) {
    const double ejk = params.e_j[k - 1];
    if (ejk == 0.0) continue;
    const auto trig = oscillator::displacement_trig(k * b.phi_zpf, dim, with_sin);
    h -= ejk * std::cos(k * params.phi_ext) * trig.cos;
    if (with_sin) h -= ejk * std::sin(k * params.phi_ext) * trig.sin;
  }
  return h;
}

void solve_block(const Eigen::MatrixXd& h, const std::vector<int>& idx,
                 std::vector<double>& energies, std::vector<Eigen::VectorXd>& vectors) {
  const int n = static_cast<int>(idx.size());
  Eigen::MatrixXd sub(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) sub(i, j) = h(idx[i], idx[j]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub);
  if (es.info() != Eigen::Success) throw ConvergenceError("shunted eigensolver failed", 0.0);
  for (int c = 0; c < n; ++c) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(h.rows());
    for (int i = 0; i < n; ++i) v(idx[i]) = es.eigenvectors()(i, c);
    energies.push_back(es.eigenvalues()(c));
    vectors.push_back(std::move(v));
  }
}

}  // namespace

OscillatorBasis shunted_basis(const CircuitParams& params, int dim) {
  if (dim < 2) throw InvalidArgument("oscillator dimension must be >= 2");
  OscillatorBasis b;
  b.dim = dim;
  b.e_ref = std::max(params.e_l, params.e_j.empty() ? 0.0 : params.e_j[0] / 16.0);
  if (!(b.e_ref > 0.0)) throw InvalidArgument("shunted basis needs e_l > 0");
  b.phi_zpf = std::pow(2.0 * params.e_c / b.e_ref, 0.25);
  b.n_zpf = 0.5 / b.phi_zpf;
  return b;
}

Eigen::MatrixXd build_shunted_hamiltonian(const CircuitParams& params, const SolverConfig& config) {
  check_shunted(params);
  config.validate();
  return assemble(params, shunted_basis(params, config.osc_dim));
}

ShuntedSpectrum shunted_eigensystem(const CircuitParams& params, int dim) {
  check_shunted(params);
  ShuntedSpectrum out;
  out.basis = shunted_basis(params, dim);
  const Eigen::MatrixXd h = assemble(params, out.basis);

  std::vector<double> energies;
  std::vector<Eigen::VectorXd> vectors;
  if (has_sine_terms(params)) {
    std::vector<int> all(dim);
    std::iota(all.begin(), all.end(), 0);
    solve_block(h, all, energies, vectors);
  } else {
    // Only even Fock offsets couple: split by (-1)^n.
    std::vector<int> even, odd;
    for (int i = 0; i < dim; ++i) (i % 2 == 0 ? even : odd).push_back(i);
    solve_block(h, even, energies, vectors);
    solve_block(h, odd, energies, vectors);
  }
  std::vector<int> order(energies.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return energies[a] < energies[b]; });
  out.energies.resize(dim);
  out.vectors.resize(dim, dim);
  for (int c = 0; c < dim; ++c) {
    out.energies(c) = energies[order[c]];
    out.vectors.col(c) = vectors[order[c]];
  }
  return out;
}

TransitionSet plasmon_transitions(const ShuntedSpectrum& spectrum, const SolverConfig& config,
                                  Parity parity) {
  const int n_levels = config.n_levels;
  // States in the upper half of a truncated basis are truncation artifacts.
  const int usable = static_cast<int>(spectrum.energies.size()) / 2;
  if (usable < n_levels) throw InvalidArgument("oscillator basis too small for n_levels");
  TransitionSet out;
  out.provenance = Provenance::predicted;
  int current = 0;
  for (int i = 0; i + 1 < n_levels; ++i) {
    const Eigen::VectorXd y = oscillator::apply_ladder_difference(spectrum.vectors.col(current));
    const Eigen::VectorXd overlaps =
        (spectrum.vectors.leftCols(usable).transpose() * y).cwiseAbs();
    int best = -1, second = -1;
    for (int j = current + 1; j < usable; ++j) {
      if (best < 0 || overlaps(j) > overlaps(best)) {
        second = best;
        best = j;
      } else if (second < 0 || overlaps(j) > overlaps(second)) {
        second = j;
      }
    }
    if (best < 0) throw InvalidArgument("no higher state available for the ladder");
    if (second >= 0 && overlaps(second) >= 0.99 * overlaps(best)) {
      std::ostringstream os;
      os << "ambiguous ladder step from state " << current << ": states " << best << " and "
         << second << " have charge matrix elements within 1%";
      throw AmbiguityError(os.str(), best, second);
    }
    out.entries.push_back(
        {i, i + 1, spectrum.energies(best) - spectrum.energies(current), parity, 0.0});
    current = best;
  }
  return out;
}

Eigen::VectorXd shunted_ladder(const CircuitParams& params, int dim, int n_levels) {
  SolverConfig cfg;
  cfg.n_levels = n_levels;
  const auto set = plasmon_transitions(shunted_eigensystem(params, dim), cfg, params.parity);
  Eigen::VectorXd f(set.entries.size());
  for (std::size_t i = 0; i < set.entries.size(); ++i) f(i) = set.entries[i].freq_ghz;
  return f;
}

TransitionSet shunted_transitions(const CircuitParams& params, const SolverConfig& config) {
  check_shunted(params);
  config.validate();
  int dim = config.osc_dim;
  Eigen::VectorXd coarse = shunted_ladder(params, dim, config.n_levels);
  double achieved = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt < 2; ++attempt) {
    const auto spectrum = shunted_eigensystem(params, 2 * dim);
    TransitionSet fine = plasmon_transitions(spectrum, config, params.parity);
    achieved = 0.0;
    for (int i = 0; i < coarse.size(); ++i) {
      const double f = fine.entries[i].freq_ghz;
      achieved = std::max(achieved, std::abs(f - coarse(i)) / std::max(std::abs(f), params.e_c));
    }
    if (achieved < config.conv_tol) return fine;
    for (int i = 0; i < coarse.size(); ++i) coarse(i) = fine.entries[i].freq_ghz;
    dim *= 2;
  }
  std::ostringstream os;
  os << "oscillator basis not converged at M=" << dim << " (relative change " << achieved << ")";
  throw ConvergenceError(os.str(), achieved);
}

}  // namespace qcharge
