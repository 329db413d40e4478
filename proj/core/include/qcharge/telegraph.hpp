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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qcharge {

struct TelegraphTrace {
  std::vector<double> t_s;
  std::vector<double> values;
  /// Mean repetition interval; 0 means derive it from the timestamps.
  double mean_interval_s = 0.0;

  void validate() const;
  double mean_interval() const;
};

struct TelegraphParams {
  double gamma_ps_hz = 8.0e3;
  /// Stationary probability of the even parity.
  double p_even = 0.5;
  double i_even = 1.0;
  double i_odd = -1.0;
  double mean_interval_s = 12e-6;
  int n_samples = 1000000;
  /// 0 gives a regular grid; 1 gives exponentially distributed intervals.
  double jitter = 0.0;
  double noise_sigma = 0.0;
};

struct TelegraphSimulation {
  TelegraphTrace trace;
  /// Hidden parity at each sample (true = odd).
  std::vector<std::uint8_t> odd;
  /// Fraction of samples spent in the odd parity.
  double realized_odd_fraction = 0.0;
};

/// Two-state Markov chain with rates even->odd = 2 gamma p_odd and odd->even =
/// 2 gamma p_even, so that the +-1 autocorrelation decays as e^{-2 gamma t}.
/// Intervals are mean * ((1 - jitter) + jitter * Exp(1)). Transitions between
/// samples are drawn from the exact two-state propagator.
TelegraphSimulation simulate_telegraph(const TelegraphParams& params, std::uint64_t seed);

struct Autocorrelation {
  std::vector<double> lag_s;   // mean lag of the products in each bin
  std::vector<double> c;       // mean of I(t) I(t + lag), not mean-subtracted
  std::vector<double> std_error;  // batch-means standard error
  std::vector<long long> counts;
  std::vector<std::string> warnings;
};

/// Lagged products binned at multiples of the mean interval, up to max_lag. The
/// first entry is the zero-lag mean of I^2; later entries hold distinct pairs.
Autocorrelation autocorrelation(const TelegraphTrace& trace, double max_lag_s, int batches = 50);

struct AutocorrFit {
  double gamma_ps_hz = 0.0;
  double beta = 1.0;
  double amplitude = 0.0;
  double offset = 0.0;
  double markov_gamma_hz = 0.0;
  double gamma_sigma_hz = 0.0;
  double beta_sigma = 0.0;
  bool converged = false;
};

/// Fits A exp(-(2 gamma t)^beta) + B over the non-zero lags, and again with
/// beta = 1 for markov_gamma. Bins with zero lag are skipped: they carry the
/// readout-noise variance.
AutocorrFit fit_stretched_exponential(const Autocorrelation& ac);

struct Imbalance {
  double p_even = 0.5;
  double p_odd = 0.5;
  double uncertainty = 0.0;
  double threshold = 0.0;
  double level_even = 0.0;
  double level_odd = 0.0;
  double misclassification = 0.0;
};

/// Time fractions in each parity from the single-shot values: a 2-means split
/// started at the hints, refined by an equal-width two-Gaussian mixture. The
/// component started at `even_hint` is labelled even. The uncertainty accounts
/// for the lag-1 correlation of the state sequence. `misclassification` is the
/// fraction of shots beyond the midpoint threshold on the wrong side.
Imbalance estimate_imbalance(const TelegraphTrace& trace, double even_hint, double odd_hint);

}  // namespace qcharge
