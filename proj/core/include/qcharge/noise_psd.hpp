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

#include <string>
#include <utility>
#include <vector>

#include "qcharge/offset_tracker.hpp"

namespace qcharge {

struct PsdOptions {
  int segments = 4;
  double overlap = 0.5;
  /// "mean" (default) or "linear".
  std::string detrend = "mean";
  /// "hann" (default) or "rectangular". The steep drift spectrum leaks through
  /// rectangular sidelobes and biases the slope.
  std::string window = "hann";
};

/// One-sided spectral density of the charge q = 2e n_g0, in e^2/Hz (four times
/// the n_g0 density).
struct PsdEstimate {
  std::vector<double> freq_hz;
  std::vector<double> density;
  double dt_s = 0.0;
  int segment_length = 0;
  int segments_used = 0;
  std::string detrend;
  std::string window;
  std::string units = "e^2/Hz of q = 2e n_g0";
  bool resampled = false;
  /// [1 / record length, Nyquist] of the input record.
  double record_f_min_hz = 0.0;
  double record_f_max_hz = 0.0;
  /// Mean variance of the detrended segments, in n_g0^2.
  double segment_variance = 0.0;
};

/// Averaged periodogram over overlapping segments. NaN samples mark gaps;
/// segments are placed only inside gap-free runs.
PsdEstimate psd(const ChargeTrack& track, const PsdOptions& options = {});

/// Integral of the density over its grid, in e^2. The DC bin is not part of the
/// estimate.
double psd_integral(const PsdEstimate& est);

struct PowerLawFit {
  double alpha = 0.0;
  double alpha_sigma = 0.0;
  double f_ref_hz = 0.0;
  double amplitude = 0.0;  // S(f_ref), e^2/Hz
  /// S(f_ref) of the 1/f^2 line through the range: mean of S(f) (f / f_ref)^2.
  double amplitude_inverse_square = 0.0;
  double f_lo_hz = 0.0;
  double f_hi_hz = 0.0;
  int n_points = 0;
  /// |alpha + 2| > 0.5.
  bool not_inverse_square = false;
};

/// Straight-line fit of log S against log f over [f_lo, f_hi].
PowerLawFit fit_power_law(const PsdEstimate& est, double f_ref_hz, double f_lo_hz, double f_hi_hz);

/// [first bin, min(0.3 Nyquist, last bin)]: the lowest bins hold the anchor
/// and below the cut the sampled random walk stays within 8% of 1/f^2.
std::pair<double, double> default_fit_range(const PsdEstimate& est);

/// amplitude * (f / f_ref)^alpha on the given grid, for comparison lines.
std::vector<double> power_law_line(double amplitude, double alpha, double f_ref_hz,
                                   const std::vector<double>& freq_hz);

}  // namespace qcharge
