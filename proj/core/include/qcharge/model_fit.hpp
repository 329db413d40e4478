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

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qcharge/circuit.hpp"
#include "qcharge/optimize.hpp"

namespace qcharge {

struct FitOptions {
  /// Truncations used inside the fit. The final prediction is recomputed with
  /// the relevant one doubled; a change above conv_tol clears `converged`.
  SolverConfig solver{20, 200, 1e-9, 5};
  OptimizeOptions optimizer;
  /// Optional per-entry weights (same order as the measured entries).
  std::vector<double> weights;
  /// Worker threads for sweeps (0 = hardware concurrency).
  unsigned threads = 0;
};

struct FitReport {
  /// "H<N>" for the harmonic transmon, "Hfull" for the shunted model.
  std::string model;
  CircuitParams params;
  CircuitParams initial_guess;
  /// predicted - measured, MHz, in the order of the measured entries.
  std::vector<double> residuals_mhz;
  double rms_mhz = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Residual-based 1-sigma of e_c, e_j[0..N-1], GHz.
  std::vector<double> sigma;
};

/// Predicted frequencies for every entry of `like`, same order. Entries may be
/// any (i, j) pair; shunted predictions need n_g = 0 entries.
Eigen::VectorXd predict_frequencies(const CircuitParams& params, const TransitionSet& like,
                                    const SolverConfig& config);

/// Transmon relations: e_c from f01 - f12, e_j[0] from f01^2 / (8 e_c), higher
/// harmonics zero. Uses the even n_g = 0 entries when present.
CircuitParams default_guess(const TransitionSet& measured, int order);

/// Least-squares fit of {e_c, e_j[0..order-1]} of the charge-basis model.
FitReport fit_harmonics(const TransitionSet& measured, int order, const CircuitParams& guess,
                        const FitOptions& options = {});

/// Fits orders 1..order in turn, each started from the previous result.
FitReport fit_harmonics_staged(const TransitionSet& measured, int order,
                               const FitOptions& options = {});

/// Fit of {e_c, e_j[0..order-1]} of the shunted model at fixed e_l > 0.
FitReport fit_shunted(const TransitionSet& measured, double e_l, int order,
                      const CircuitParams& guess, const FitOptions& options = {});

struct ElSweepPoint {
  double e_l = 0.0;
  bool ok = false;
  std::string failure;
  FitReport fit;
  /// Prediction of the fitted model with the shunt removed (e_l = 0), f_{i,i+1}
  /// averaged over the two parity branches at n_g = 0.
  TransitionSet removed;
};

struct ElSweepResult {
  int order = 3;
  std::vector<ElSweepPoint> points;

  std::vector<double> grid() const;
};

/// 60 log-spaced points in [1 MHz, 2 GHz].
std::vector<double> default_el_grid();

/// Fits the shunted model at every grid point. The measured set is reduced to
/// its even-parity n_g = 0 entries; a grid value of 0 uses the charge-basis fit.
ElSweepResult el_sweep(const TransitionSet& measured, const std::vector<double>& grid,
                       int order = 3, const FitOptions& options = {},
                       std::optional<CircuitParams> guess = std::nullopt);

struct FrequencyBand {
  struct Interval {
    int lower = 0;
    int upper = 1;
    double min_ghz = 0.0;
    double max_ghz = 0.0;
  };
  std::vector<Interval> intervals;

  void validate() const;
};

struct InductanceBound {
  double e_l_max = 0.0;
  double l_min_henry = 0.0;
  /// No grid point satisfied the band; e_l_max is then the grid minimum.
  bool unbounded_below_grid = false;
};

/// Largest grid e_l whose removed-shunt predictions all lie inside the band
/// (edges inclusive).
InductanceBound inductance_bound(const ElSweepResult& sweep, const FrequencyBand& band);

/// E_J sqrt(8 shift / f01): the E_L at which the flux dispersion would reach
/// the observed shift.
double flux_dispersion_bound(double e_j, double f01, double observed_shift);

}  // namespace qcharge
