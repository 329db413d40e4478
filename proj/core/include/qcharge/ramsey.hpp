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
#include <vector>

#include "qcharge/spectral.hpp"

namespace qcharge {

struct RamseyTrace {
  std::vector<double> tau_s;
  std::vector<double> i_quadrature;
  int repetitions = 1;

  /// Throws unless tau is strictly increasing.
  void validate() const;
  /// Sample step when the grid is uniform to 1e-9 relative; throws otherwise.
  double uniform_step() const;
  /// Record length n * dt used for the spectral resolution.
  double span() const;
};

struct RamseyModel {
  double f1_hz = 0.0;
  double f2_hz = 0.0;
  double t2_s = 0.0;
  double w1 = 1.0;
  double w2 = 1.0;
};

/// Uniform delay grid of n points starting at 0.
std::vector<double> uniform_grid(double step_s, int n);

/// I(tau) = e^{-tau/t2} (w1 cos 2 pi f1 tau + w2 cos 2 pi f2 tau) + N(0, noise_sigma).
RamseyTrace synth_ramsey(const RamseyModel& model, const std::vector<double>& tau,
                         double noise_sigma, std::uint64_t seed);

/// Spectrum of a Ramsey record (uniform grid required).
SpectrumEstimate fft_magnitude(const RamseyTrace& trace, int pad_factor = 8);

struct RamseyFit {
  RamseyModel model;
  /// No resolved second line (f1 and f2 within 1 / span, or w2 not
  /// significant): the single-cosine fit is reported, w2 = 0.
  bool single_frequency = false;
  bool converged = false;
  double rms_residual = 0.0;
};

/// Time-domain least-squares fit of the synth_ramsey model. A single damped
/// cosine is fitted from the top spectral peak; a second one, started from the
/// top peak of the residual spectrum, is kept when it is resolved (>= 1 / span
/// away) and its weight exceeds both 3 sigma and 2% of w1.
RamseyFit time_domain_fit(const RamseyTrace& trace);

struct ChargeOffsetEstimate {
  /// Principal value in [0, 0.5]. n_g is only known up to n_g -> -n_g and n_g -> n_g + 1.
  double n_g = 0.0;
  /// Half-width of the n_g interval reached when the splitting moves by +-sigma.
  double uncertainty = 0.0;
  bool clamped = false;
};

/// Inverts f_odd - f_even = (-1)^(level+1) delta_f cos(2 pi n_g). `peak_sigma`
/// is the uncertainty of each peak center; the splitting then carries
/// sqrt(2) peak_sigma. Splittings beyond delta_f by more than 5% throw.
ChargeOffsetEstimate splitting_to_ng(double f_even_hz, double f_odd_hz, double delta_f_hz,
                                     double peak_sigma_hz = 0.0, int level = 3);

/// Forward map: the parity splitting f_odd - f_even at a given n_g.
double ng_to_splitting(double n_g, double delta_f_hz, int level = 3);

}  // namespace qcharge
