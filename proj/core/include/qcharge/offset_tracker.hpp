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
#include <string>
#include <vector>

#include "qcharge/ramsey.hpp"
#include "qcharge/spectral.hpp"

namespace qcharge {

struct Spectrogram {
  std::vector<double> times_s;
  std::vector<double> freq_hz;
  std::vector<std::vector<double>> rows;  // magnitude, one row per time
  std::string run_label;
  /// Gate voltage per row; empty when no V_DC sweep was recorded.
  std::vector<double> vdc_v;
  /// Ramsey drive frequency. When > 0 the grid holds detunings and a peak at
  /// detuning d is the transition drive_hz - d.
  double drive_hz = 0.0;

  void validate() const;
  SpectrumEstimate row_spectrum(std::size_t row) const;
};

/// Rows built from simulated Ramsey records: row r uses models[r] (with
/// models[r].t2_s <= 0 meaning a blanked row of pure noise).
Spectrogram spectrogram_from_ramsey(const std::vector<double>& times_s,
                                    const std::vector<RamseyModel>& models,
                                    const std::vector<double>& tau, double noise_sigma,
                                    std::uint64_t seed, int pad_factor = 8);

struct RowTrack {
  bool gap = false;
  std::string diagnostic;
  PeakFit fit;
};

struct TrackResult {
  std::vector<RowTrack> rows;
  /// tracks[k][r]: center of track k in row r (NaN in gap rows).
  std::vector<std::vector<double>> tracks;
  int gap_rows = 0;
};

struct TrackOptions {
  /// A row is a gap unless every fitted peak height exceeds this multiple of
  /// the row's median power. Noise-only rows reach roughly 10.
  double min_contrast = 30.0;
  unsigned threads = 0;
};

/// Transition frequency of a grid frequency (identity when drive_hz = 0).
double absolute_frequency(const Spectrogram& spec, double grid_hz);

/// Per-row Lorentzian fits linked into continuous tracks by nearest center.
TrackResult track_peaks(const Spectrogram& spec, int n_peaks, const TrackOptions& options = {});

struct ChargeTrack {
  std::vector<double> t_s;
  std::vector<double> ng;
  std::vector<double> ng_err;
  /// Set where the unwrapped branch moved by more than a quarter period.
  std::vector<std::uint8_t> jump;

  void validate() const;
};

/// Upper and lower peak of one row of a V_DC sweep.
struct VdcPoint {
  double t_s = 0.0;
  double vdc_v = 0.0;
  double f_hi_hz = 0.0;
  double f_lo_hz = 0.0;
};

/// Two-peak fit of every row (power Lorentzians, then the coherent line shape);
/// rows whose peaks cannot be separated are skipped.
std::vector<VdcPoint> extract_vdc_points(const Spectrogram& spec, unsigned threads = 0);

struct VdcFit {
  double f_mean_hz = 0.0;
  double delta_f_hz = 0.0;
  double v_period_v = 0.0;
  double f_mean_sigma = 0.0;
  double delta_f_sigma = 0.0;
  double v_period_sigma = 0.0;
  /// One point per block of rows sharing a timestamp.
  ChargeTrack track;
  double rms_hz = 0.0;
  bool converged = false;
  /// Points dropped as outliers (residual above 6 robust sigma).
  int rejected_points = 0;
};

/// Joint least-squares fit of
///   f_hi/lo = f_mean +- (delta_f / 2) |cos(2 pi (n_g0(t) + V / V_period))|
/// with f_mean, delta_f, V_period shared by all blocks. Without parity labels
/// n_g0 is fixed only modulo 1/2: each block is reduced to [-1/4, 1/4) and the
/// sequence is then unwrapped, flagging steps above 1/8 as jumps. Points whose
/// residual exceeds 6 robust sigma are dropped and the fit repeated.
VdcFit global_vdc_fit(const std::vector<VdcPoint>& points);
VdcFit global_vdc_fit(const Spectrogram& spec, unsigned threads = 0);

/// n_g from the splitting of the row closest to V = 0 in every block, as a
/// measurement without gate sweep would give. Values fold into [0, 1/4].
ChargeTrack splitting_only_track(const std::vector<VdcPoint>& points, double delta_f_hz);

/// Gaussian random walk of n_g0 with per-sample step `step_sigma`.
ChargeTrack simulate_charge_drift(double step_sigma, double dt_s, int n, std::uint64_t seed,
                                  double start = 0.0);

/// Step sigma of n_g0 whose random walk has density `target_e2_per_hz` of the
/// charge q = 2e n_g0 at f_ref: sigma = sin(pi f dt) sqrt(S / (2 dt)).
double calibrate_step_sigma(double target_e2_per_hz, double f_ref_hz, double dt_s);

}  // namespace qcharge
