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

#include "qcharge/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include <unsupported/Eigen/FFT>

#include "qcharge/error.hpp"
#include "qcharge/optimize.hpp"

namespace qcharge {

SpectrumEstimate fft_magnitude(const std::vector<double>& values, double dt, int pad_factor,
                               bool remove_mean) {
  if (values.size() < 2) throw InvalidArgument("spectrum needs at least two samples");
  if (!(dt > 0.0)) throw InvalidArgument("sample spacing must be positive");
  if (pad_factor < 1) throw InvalidArgument("pad_factor must be >= 1");
  const int n = static_cast<int>(values.size());
  int n_fft = n * pad_factor;
  if (n_fft % 2) n_fft += 1;

  std::vector<double> x(n_fft, 0.0);
  const double mean =
      remove_mean ? std::accumulate(values.begin(), values.end(), 0.0) / n : 0.0;
  for (int i = 0; i < n; ++i) x[i] = values[i] - mean;

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, x);

  SpectrumEstimate out;
  out.pad_factor = pad_factor;
  out.n_fft = n_fft;
  out.n_samples = n;
  out.mean_removed = remove_mean;
  const int half = n_fft / 2;
  out.freq_hz.resize(half + 1);
  out.magnitude.resize(half + 1);
  for (int k = 0; k <= half; ++k) {
    out.freq_hz[k] = k / (n_fft * dt);
    out.magnitude[k] = std::abs(spectrum[k]);
  }
  return out;
}

double spectrum_energy(const SpectrumEstimate& spec) {
  if (spec.n_fft < 2 || spec.n_fft % 2 || static_cast<int>(spec.magnitude.size()) != spec.n_fft / 2 + 1)
    throw InvalidArgument("spectrum_energy needs an even-length one-sided spectrum");
  const int half = spec.n_fft / 2;
  double e = spec.magnitude[0] * spec.magnitude[0] + spec.magnitude[half] * spec.magnitude[half];
  for (int k = 1; k < half; ++k) e += 2.0 * spec.magnitude[k] * spec.magnitude[k];
  return e / spec.n_fft;
}

std::vector<int> find_peaks(const SpectrumEstimate& spec, int n_peaks) {
  const auto& m = spec.magnitude;
  std::vector<int> maxima;
  for (int k = 1; k + 1 < static_cast<int>(m.size()); ++k)
    if (m[k] > m[k - 1] && m[k] >= m[k + 1]) maxima.push_back(k);
  std::sort(maxima.begin(), maxima.end(), [&](int a, int b) { return m[a] > m[b]; });
  if (static_cast<int>(maxima.size()) > n_peaks) maxima.resize(n_peaks);
  std::sort(maxima.begin(), maxima.end());
  return maxima;
}

namespace {

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  return v[mid];
}

int nearest_bin(const SpectrumEstimate& spec, double f) {
  const double bin = spec.bin_hz();
  const int k = static_cast<int>(std::lround((f - spec.freq_hz.front()) / bin));
  return std::clamp(k, 0, static_cast<int>(spec.freq_hz.size()) - 1);
}

}  // namespace

PeakFit fit_lorentzian_peaks(const SpectrumEstimate& spec, int n_peaks,
                             const std::vector<double>& guesses) {
  if (n_peaks < 1) throw InvalidArgument("n_peaks must be >= 1");
  if (spec.freq_hz.size() < 4 || spec.freq_hz.size() != spec.magnitude.size())
    throw InvalidArgument("spectrum too short for a peak fit");
  const int m = static_cast<int>(spec.freq_hz.size());
  const double bin = spec.bin_hz();
  const double f_lo = spec.freq_hz.front(), f_hi = spec.freq_hz.back();

  std::vector<double> centers = guesses;
  if (centers.empty()) {
    for (int k : find_peaks(spec, n_peaks)) centers.push_back(spec.freq_hz[k]);
  }
  if (static_cast<int>(centers.size()) != n_peaks)
    throw InvalidArgument("could not find initial guesses for every peak");
  for (double c : centers)
    if (c < f_lo || c > f_hi) throw InvalidArgument("peak guess outside the frequency grid");

  Eigen::VectorXd power(m);
  for (int k = 0; k < m; ++k) power(k) = spec.magnitude[k] * spec.magnitude[k];
  const double base0 = median(std::vector<double>(power.data(), power.data() + m));

  // Parameters: (center, half_width, amplitude) per peak, then baseline.
  Eigen::VectorXd x0(3 * n_peaks + 1), scale(3 * n_peaks + 1);
  double peak_scale = 0.0;
  for (int p = 0; p < n_peaks; ++p) {
    const int k = nearest_bin(spec, centers[p]);
    const double height = std::max(power(k) - base0, 0.0);
    int lo = k, hi = k;
    while (lo > 0 && power(lo) - base0 > 0.5 * height) --lo;
    while (hi + 1 < m && power(hi) - base0 > 0.5 * height) ++hi;
    const double width = std::max(0.5 * (hi - lo) * bin, bin);
    x0.segment<3>(3 * p) << centers[p], width, height;
    scale.segment<3>(3 * p) << width, width, std::max(height, 1e-300);
    peak_scale = std::max(peak_scale, height);
  }
  x0(3 * n_peaks) = base0;
  scale(3 * n_peaks) = std::max(peak_scale * 1e-3, std::abs(base0));
  if (!(peak_scale > 0.0)) throw InvalidArgument("no peak above the baseline");

  const Eigen::VectorXd freq = Eigen::Map<const Eigen::VectorXd>(spec.freq_hz.data(), m);
  auto model = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd y = Eigen::VectorXd::Constant(m, x(3 * n_peaks));
    for (int p = 0; p < n_peaks; ++p) {
      const double w = std::abs(x(3 * p + 1));
      y.array() += x(3 * p + 2) / (1.0 + ((freq.array() - x(3 * p)) / w).square());
    }
    return y;
  };
  // Residuals relative to the tallest peak keep the cost well scaled.
  const double norm = 1.0 / peak_scale;
  ResidualFn f = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    for (int p = 0; p < n_peaks; ++p)
      if (x(3 * p + 1) == 0.0) throw InvalidArgument("zero width");
    return (model(x) - power) * norm;
  };
  OptimizeOptions opts;
  opts.max_simplex_iterations = 0;
  opts.scale = scale;
  opts.max_lm_iterations = 400;
  const OptimizeResult res = least_squares(f, x0, opts);

  PeakFit out;
  out.converged = res.converged;
  out.baseline = res.x(3 * n_peaks);
  out.rms_residual = std::sqrt(res.cost / m) / norm;
  for (int p = 0; p < n_peaks; ++p)
    out.peaks.push_back({res.x(3 * p), std::abs(res.x(3 * p + 1)), res.x(3 * p + 2)});
  std::sort(out.peaks.begin(), out.peaks.end(),
            [](const Peak& a, const Peak& b) { return a.center_hz < b.center_hz; });
  for (std::size_t p = 1; p < out.peaks.size(); ++p)
    if (out.peaks[p].center_hz - out.peaks[p - 1].center_hz < bin) out.overlapping = true;
  for (const auto& pk : out.peaks)
    if (pk.center_hz < f_lo || pk.center_hz > f_hi) out.converged = false;
  return out;
}

PeakFit fit_coherent_peaks(const SpectrumEstimate& spec, const PeakFit& start) {
  const int n_peaks = static_cast<int>(start.peaks.size());
  if (n_peaks < 1) throw InvalidArgument("coherent fit needs at least one starting peak");
  const int m = static_cast<int>(spec.freq_hz.size());
  if (m < 4 || static_cast<int>(spec.magnitude.size()) != m)
    throw InvalidArgument("spectrum too short for a peak fit");
  const double bin = spec.bin_hz();
  const Eigen::VectorXd freq = Eigen::Map<const Eigen::VectorXd>(spec.freq_hz.data(), m);
  const Eigen::VectorXd mag = Eigen::Map<const Eigen::VectorXd>(spec.magnitude.data(), m);
  const double top = mag.maxCoeff();
  if (!(top > 0.0)) throw InvalidArgument("no peak above the baseline");
  const double norm = 1.0 / top;

  // Parameters: (center, half_width, a) per peak, then baseline.
  auto model = [&](const Eigen::VectorXd& x) {
    Eigen::ArrayXcd z = Eigen::ArrayXcd::Zero(m);
    for (int p = 0; p < n_peaks; ++p) {
      const double c = x(3 * p), w = std::abs(x(3 * p + 1)), a = x(3 * p + 2);
      const std::complex<double> iw(w, 0.0);
      for (int k = 0; k < m; ++k)
        z(k) += a * (1.0 / (iw + std::complex<double>(0.0, freq(k) - c)) +
                     1.0 / (iw + std::complex<double>(0.0, freq(k) + c)));
    }
    return Eigen::VectorXd(z.abs().matrix().array() + x(3 * n_peaks));
  };
  ResidualFn f = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    for (int p = 0; p < n_peaks; ++p)
      if (x(3 * p + 1) == 0.0) throw InvalidArgument("zero width");
    return (model(x) - mag) * norm;
  };

  // Relative signs of a_k are not visible in the starting fit; every pattern
  // with a_0 > 0 is tried.
  OptimizeResult best;
  bool have = false;
  for (int signs = 0; signs < (1 << (n_peaks - 1)); ++signs) {
    Eigen::VectorXd x0(3 * n_peaks + 1), scale(3 * n_peaks + 1);
    for (int p = 0; p < n_peaks; ++p) {
      const auto& pk = start.peaks[p];
      const double w = std::max(pk.half_width_hz, bin);
      const double sign = (p > 0 && (signs >> (p - 1)) & 1) ? -1.0 : 1.0;
      const double a = sign * std::sqrt(std::max(pk.amplitude, 0.0)) * w;
      x0.segment<3>(3 * p) << pk.center_hz, w, a;
      scale.segment<3>(3 * p) << w, w, std::max(std::abs(a), top * bin);
    }
    x0(3 * n_peaks) = std::sqrt(std::max(start.baseline, 0.0));
    scale(3 * n_peaks) = 1e-3 * top;
    OptimizeOptions opts;
    opts.max_simplex_iterations = 0;
    opts.scale = scale;
    opts.max_lm_iterations = 400;
    OptimizeResult res = least_squares(f, x0, opts);
    if (!have || res.cost < best.cost) best = std::move(res), have = true;
  }

  PeakFit out;
  out.converged = best.converged;
  out.baseline = best.x(3 * n_peaks) * std::abs(best.x(3 * n_peaks));
  out.rms_residual = std::sqrt(best.cost / m) / norm;
  for (int p = 0; p < n_peaks; ++p) {
    const double w = std::abs(best.x(3 * p + 1));
    const double h = best.x(3 * p + 2) / w;
    out.peaks.push_back({best.x(3 * p), w, h * h});
  }
  std::sort(out.peaks.begin(), out.peaks.end(),
            [](const Peak& a, const Peak& b) { return a.center_hz < b.center_hz; });
  for (std::size_t p = 1; p < out.peaks.size(); ++p)
    if (out.peaks[p].center_hz - out.peaks[p - 1].center_hz < bin) out.overlapping = true;
  for (const auto& pk : out.peaks)
    if (pk.center_hz < spec.freq_hz.front() || pk.center_hz > spec.freq_hz.back()) out.converged = false;
  return out;
}

std::vector<std::pair<int, int>> pair_doublets(const PeakFit& fit) {
  const int n = static_cast<int>(fit.peaks.size());
  if (n % 2) throw InvalidArgument("doublet pairing needs an even number of peaks");
  std::vector<bool> used(n, false);
  std::vector<std::pair<int, int>> pairs;
  for (int round = 0; round < n / 2; ++round) {
    int bi = -1, bj = -1;
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
      if (used[i]) continue;
      for (int j = i + 1; j < n; ++j) {
        if (used[j]) continue;
        const double d = std::abs(fit.peaks[j].center_hz - fit.peaks[i].center_hz);
        if (bi < 0 || d < best) bi = i, bj = j, best = d;
      }
    }
    used[bi] = used[bj] = true;
    pairs.emplace_back(bi, bj);
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

}  // namespace qcharge
