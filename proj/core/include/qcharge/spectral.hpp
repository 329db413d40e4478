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
#include <vector>

namespace qcharge {

/// One-sided DFT magnitude of a uniformly sampled record.
struct SpectrumEstimate {
  std::vector<double> freq_hz;
  std::vector<double> magnitude;
  int pad_factor = 1;
  /// Length of the (zero-padded) transform.
  int n_fft = 0;
  int n_samples = 0;
  bool mean_removed = true;
  std::string window = "none";

  double bin_hz() const { return freq_hz.size() > 1 ? freq_hz[1] - freq_hz[0] : 0.0; }
};

/// |DFT| of `values` (uniform step dt) after optional mean removal and zero
/// padding to pad_factor * n samples. Bin spacing is 1 / (pad_factor * n * dt).
SpectrumEstimate fft_magnitude(const std::vector<double>& values, double dt, int pad_factor = 8,
                               bool remove_mean = true);

/// Sum |x|^2 recovered from the one-sided spectrum (Parseval).
double spectrum_energy(const SpectrumEstimate& spec);

struct Peak {
  double center_hz = 0.0;
  double half_width_hz = 0.0;
  double amplitude = 0.0;
};

/// Lorentzians fitted to the power |spectrum|^2:
///   P(f) = baseline + sum_k amplitude_k / (1 + ((f - center_k) / half_width_k)^2).
/// A damped cosine e^{-t/T2} cos(2 pi f0 t) gives half-width 1 / (2 pi T2).
struct PeakFit {
  std::vector<Peak> peaks;  // sorted by center
  double baseline = 0.0;
  double rms_residual = 0.0;
  bool converged = false;
  /// Pairs of fitted peaks closer than one bin.
  bool overlapping = false;
};

/// Indices of the n highest strict local maxima of `magnitude`, sorted by frequency.
std::vector<int> find_peaks(const SpectrumEstimate& spec, int n_peaks);

/// Least-squares Lorentzian fit. `guesses` are initial centers in Hz; empty
/// means the n highest local maxima.
PeakFit fit_lorentzian_peaks(const SpectrumEstimate& spec, int n_peaks,
                             const std::vector<double>& guesses = {});

/// Refines `start` with the magnitude of coherently added complex Lorentzians,
///   |S(f)| = baseline + |sum_k a_k [1 / (w_k + i (f - c_k)) + 1 / (w_k + i (f + c_k))]|,
/// a_k real. This is the line shape of damped cosines sharing a start phase;
/// unlike the power sum it keeps the interference between close peaks, which
/// otherwise pushes the fitted centers apart. Amplitudes are reported as the
/// power (a_k / w_k)^2 at each center.
PeakFit fit_coherent_peaks(const SpectrumEstimate& spec, const PeakFit& start);

/// Groups four fitted centers into two doublets by nearest neighbour: each
/// returned pair holds the indices (into peaks) of a doublet.
std::vector<std::pair<int, int>> pair_doublets(const PeakFit& fit);

}  // namespace qcharge
