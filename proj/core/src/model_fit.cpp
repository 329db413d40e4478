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

#include "qcharge/model_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <utility>

#include "qcharge/error.hpp"
#include "qcharge/parallel.hpp"
#include "qcharge/shunted.hpp"
#include "qcharge/units.hpp"

namespace qcharge {

namespace {

int max_upper(const TransitionSet& set) {
  int m = 0;
  for (const auto& t : set.entries) m = std::max(m, t.upper);
  return m;
}

Eigen::VectorXd measured_vector(const TransitionSet& set) {
  Eigen::VectorXd v(set.entries.size());
  for (std::size_t i = 0; i < set.entries.size(); ++i) v(i) = set.entries[i].freq_ghz;
  return v;
}

CircuitParams unpack(const Eigen::VectorXd& x, double e_l) {
  CircuitParams p;
  p.e_c = x(0);
  p.e_j.assign(x.data() + 1, x.data() + x.size());
  p.e_l = e_l;
  return p;
}

Eigen::VectorXd pack(const CircuitParams& p, int order) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(order + 1);
  x(0) = p.e_c;
  for (int k = 0; k < order && k < p.harmonic_order(); ++k) x(k + 1) = p.e_j[k];
  return x;
}

void check_fit_inputs(const TransitionSet& measured, int order, const FitOptions& options) {
  measured.validate();
  if (order < 1 || order > 5) throw InvalidArgument("harmonic order must be in [1, 5]");
  if (static_cast<int>(measured.entries.size()) < order + 1) {
    std::ostringstream os;
    os << "under-determined fit: " << measured.entries.size() << " frequencies for " << order + 1
       << " parameters";
    throw InvalidArgument(os.str());
  }
  if (!options.weights.empty() && options.weights.size() != measured.entries.size())
    throw InvalidArgument("weights must match the measured entries");
  for (double w : options.weights)
    if (!(w >= 0.0)) throw InvalidArgument("weights must be >= 0");
}

FitReport run_fit(const TransitionSet& measured, int order, double e_l, const CircuitParams& guess,
                  const FitOptions& options) {
  check_fit_inputs(measured, order, options);
  const Eigen::VectorXd meas = measured_vector(measured);
  Eigen::VectorXd sqrt_w = Eigen::VectorXd::Ones(meas.size());
  for (std::size_t i = 0; i < options.weights.size(); ++i) sqrt_w(i) = std::sqrt(options.weights[i]);

  const SolverConfig solver = options.solver;
  auto residual = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    if (!(x(0) > 0.0) || !(x(1) >= 0.0)) throw InvalidArgument("parameter outside model domain");
    return (predict_frequencies(unpack(x, e_l), measured, solver) - meas).cwiseProduct(sqrt_w);
  };

  const Eigen::VectorXd x0 = pack(guess, order);
  OptimizeOptions opt = options.optimizer;
  if (opt.scale.size() == 0) {
    opt.scale = Eigen::VectorXd(order + 1);
    opt.scale(0) = std::max(std::abs(x0(0)), 0.01);
    opt.scale(1) = std::max(std::abs(x0(1)), 0.1);
    for (int k = 2; k <= order; ++k) opt.scale(k) = std::max(std::abs(x0(k)), 0.01 * opt.scale(1));
  }
  const OptimizeResult res = least_squares(residual, x0, opt);

  FitReport report;
  report.model = e_l > 0.0 ? "Hfull" : "H" + std::to_string(order);
  report.params = unpack(res.x, e_l);
  report.initial_guess = guess;
  report.initial_guess.e_l = e_l;
  report.iterations = res.iterations;
  report.converged = res.converged;
  report.sigma.assign(res.sigma.data(), res.sigma.data() + res.sigma.size());

  Eigen::VectorXd pred = predict_frequencies(report.params, measured, solver);
  {
    // Certify the truncation used inside the fit.
    SolverConfig fine = solver;
    if (e_l > 0.0) fine.osc_dim = 2 * solver.osc_dim;
    else fine.charge_cutoff = 2 * solver.charge_cutoff;
    const Eigen::VectorXd check = predict_frequencies(report.params, measured, fine);
    const double change = ((check - pred).cwiseAbs().array() /
                           pred.cwiseAbs().cwiseMax(report.params.e_c).array())
                              .maxCoeff();
    if (change >= solver.conv_tol) report.converged = false;
    pred = check;
  }
  const Eigen::VectorXd r = pred - meas;
  report.residuals_mhz.resize(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) report.residuals_mhz[i] = r(i) * 1e3;
  report.rms_mhz = r.size() ? std::sqrt(r.squaredNorm() / r.size()) * 1e3 : 0.0;
  return report;
}

TransitionSet sweep_subset(const TransitionSet& measured) {
  TransitionSet out;
  out.provenance = measured.provenance;
  for (const auto& t : measured.entries)
    if (t.n_g == 0.0 && t.parity == Parity::even) out.entries.push_back(t);
  if (out.entries.empty())
    throw InvalidArgument("E_L sweep needs even-parity n_g = 0 transitions");
  return out;
}

TransitionSet removed_prediction(const CircuitParams& fitted, int n_levels,
                                 const SolverConfig& config) {
  CircuitParams p = fitted;
  p.e_l = 0.0;
  p.n_g = 0.0;
  SolverConfig cfg = config;
  cfg.n_levels = n_levels;
  p.parity = Parity::even;
  const TransitionSet even = transition_frequencies(p, cfg);
  p.parity = Parity::odd;
  const TransitionSet odd = transition_frequencies(p, cfg);
  TransitionSet out;
  out.provenance = Provenance::predicted;
  out.notes.push_back("shunt removed; mean of even and odd parity at n_g = 0");
  for (std::size_t i = 0; i < even.entries.size(); ++i) {
    Transition t = even.entries[i];
    t.freq_ghz = 0.5 * (even.entries[i].freq_ghz + odd.entries[i].freq_ghz);
    out.entries.push_back(t);
  }
  return out;
}

}  // namespace

Eigen::VectorXd predict_frequencies(const CircuitParams& params, const TransitionSet& like,
                                    const SolverConfig& config) {
  Eigen::VectorXd out(like.entries.size());
  const int count = max_upper(like) + 1;
  if (params.e_l > 0.0) {
    for (const auto& t : like.entries)
      if (t.n_g != 0.0) throw InvalidArgument("shunted predictions are defined at n_g = 0 only");
    const Eigen::VectorXd gaps = shunted_ladder(params, config.osc_dim, count);
    for (std::size_t i = 0; i < like.entries.size(); ++i) {
      const auto& t = like.entries[i];
      out(i) = gaps.segment(t.lower, t.upper - t.lower).sum();
    }
    return out;
  }
  std::map<std::pair<int, double>, Eigen::VectorXd> cache;
  for (std::size_t i = 0; i < like.entries.size(); ++i) {
    const auto& t = like.entries[i];
    const auto key = std::make_pair(static_cast<int>(t.parity), t.n_g);
    auto it = cache.find(key);
    if (it == cache.end()) {
      CircuitParams p = params;
      p.n_g = t.n_g;
      p.parity = t.parity;
      it = cache.emplace(key, charge_levels(p, config.charge_cutoff, count)).first;
    }
    out(i) = it->second(t.upper) - it->second(t.lower);
  }
  return out;
}

CircuitParams default_guess(const TransitionSet& measured, int order) {
  if (order < 1) throw InvalidArgument("harmonic order must be >= 1");
  auto find = [&](int lower, bool strict) -> std::optional<double> {
    for (const auto& t : measured.entries)
      if (t.lower == lower && t.upper == lower + 1 &&
          (!strict || (t.parity == Parity::even && t.n_g == 0.0)))
        return t.freq_ghz;
    return std::nullopt;
  };
  auto f01 = find(0, true), f12 = find(1, true);
  if (!f01) f01 = find(0, false);
  if (!f12) f12 = find(1, false);
  if (!f01 || !f12) throw InvalidArgument("default guess needs f01 and f12");
  CircuitParams g;
  g.e_c = *f01 - *f12;
  if (!(g.e_c > 0.0)) throw InvalidArgument("default guess needs f01 > f12");
  g.e_j.assign(order, 0.0);
  g.e_j[0] = *f01 * *f01 / (8.0 * g.e_c);
  return g;
}

FitReport fit_harmonics(const TransitionSet& measured, int order, const CircuitParams& guess,
                        const FitOptions& options) {
  return run_fit(measured, order, 0.0, guess, options);
}

FitReport fit_harmonics_staged(const TransitionSet& measured, int order,
                               const FitOptions& options) {
  check_fit_inputs(measured, order, options);
  CircuitParams guess = default_guess(measured, 1);
  FitReport report;
  FitOptions refine = options;
  refine.optimizer.max_simplex_iterations = 0;
  for (int n = 1; n <= order; ++n) {
    // Later stages start next to the previous optimum; LM alone suffices.
    report = fit_harmonics(measured, n, guess, n == 1 ? options : refine);
    guess = report.params;
    guess.e_j.resize(n + 1, 0.0);
  }
  report.initial_guess = default_guess(measured, order);
  return report;
}

FitReport fit_shunted(const TransitionSet& measured, double e_l, int order,
                      const CircuitParams& guess, const FitOptions& options) {
  if (!(e_l >= kShuntValidityFloorGhz))
    throw InvalidArgument("fit_shunted needs e_l above the validity floor");
  return run_fit(measured, order, e_l, guess, options);
}

std::vector<double> ElSweepResult::grid() const {
  std::vector<double> g;
  for (const auto& p : points) g.push_back(p.e_l);
  return g;
}

std::vector<double> default_el_grid() {
  std::vector<double> g(60);
  const double lo = std::log(1e-3), hi = std::log(2.0);
  for (int i = 0; i < 60; ++i) g[i] = std::exp(lo + (hi - lo) * i / 59.0);
  return g;
}

ElSweepResult el_sweep(const TransitionSet& measured, const std::vector<double>& grid, int order,
                       const FitOptions& options, std::optional<CircuitParams> guess) {
  if (grid.empty()) throw InvalidArgument("empty E_L grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0)) throw InvalidArgument("E_L grid values must be >= 0");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw InvalidArgument("E_L grid must be strictly increasing");
  }
  const TransitionSet data = sweep_subset(measured);
  FitOptions point_options = options;
  point_options.weights.clear();
  if (!options.weights.empty()) {
    for (std::size_t i = 0; i < measured.entries.size(); ++i) {
      const auto& t = measured.entries[i];
      if (t.n_g == 0.0 && t.parity == Parity::even) point_options.weights.push_back(options.weights[i]);
    }
  }
  const CircuitParams base = guess ? *guess : fit_harmonics_staged(data, order, point_options).params;
  // Every point starts from the unshunted fit with E_J1 lowered by E_L; LM alone suffices.
  point_options.optimizer.max_simplex_iterations = 0;
  const int n_levels = std::max(options.solver.n_levels, max_upper(data) + 1);

  ElSweepResult result;
  result.order = order;
  result.points.resize(grid.size());
  parallel_for(
      grid.size(),
      [&](std::size_t i) {
        ElSweepPoint& pt = result.points[i];
        pt.e_l = grid[i];
        try {
          CircuitParams g = base;
          g.e_j.resize(order, 0.0);
          if (pt.e_l == 0.0) {
            pt.fit = fit_harmonics(data, order, g, point_options);
          } else {
            g.e_j[0] = std::max(g.e_j[0] - pt.e_l, 0.5 * g.e_j[0]);
            pt.fit = fit_shunted(data, pt.e_l, order, g, point_options);
          }
          pt.removed = removed_prediction(pt.fit.params, n_levels, options.solver);
          pt.ok = true;
        } catch (const Error& e) {
          pt.ok = false;
          pt.failure = e.what();
        }
      },
      options.threads);
  return result;
}

void FrequencyBand::validate() const {
  for (const auto& iv : intervals) {
    if (!(iv.lower >= 0 && iv.lower < iv.upper)) throw InvalidArgument("band levels must satisfy lower < upper");
    if (std::isnan(iv.min_ghz) || std::isnan(iv.max_ghz) || !(iv.min_ghz <= iv.max_ghz))
      throw InvalidArgument("band interval needs min <= max");
  }
}

InductanceBound inductance_bound(const ElSweepResult& sweep, const FrequencyBand& band) {
  band.validate();
  if (sweep.points.empty()) throw InvalidArgument("empty sweep");
  InductanceBound out;
  bool found = false;
  for (const auto& pt : sweep.points) {
    if (!pt.ok) continue;
    bool inside = true;
    for (const auto& iv : band.intervals) {
      double f = 0.0;
      for (int k = iv.lower; k < iv.upper; ++k) {
        if (k >= static_cast<int>(pt.removed.entries.size()))
          throw InvalidArgument("band transition not covered by the sweep predictions");
        f += pt.removed.entries[k].freq_ghz;
      }
      if (f < iv.min_ghz || f > iv.max_ghz) {
        inside = false;
        break;
      }
    }
    if (inside && (!found || pt.e_l > out.e_l_max)) {
      out.e_l_max = pt.e_l;
      found = true;
    }
  }
  if (!found) {
    out.unbounded_below_grid = true;
    out.e_l_max = sweep.points.front().e_l;
  }
  out.l_min_henry = out.e_l_max > 0.0 ? units::el_to_inductance(out.e_l_max)
                                      : std::numeric_limits<double>::infinity();
  return out;
}

double flux_dispersion_bound(double e_j, double f01, double observed_shift) {
  if (!(e_j > 0.0 && f01 > 0.0 && observed_shift >= 0.0))
    throw InvalidArgument("flux_dispersion_bound needs positive inputs");
  return e_j * std::sqrt(8.0 * observed_shift / f01);
}

}  // namespace qcharge
