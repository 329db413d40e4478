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

#include "qcharge/noise_psd.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "qcharge/error.hpp"

namespace qcharge {

namespace {

// Charge q = 2e n_g0, so the density in e^2/Hz is four times that of n_g0.
constexpr double kChargeFactor = 4.0;

// Resamples onto a uniform grid by linear interpolation (NaN propagates).
std::vector<double> resample(const ChargeTrack& tr, double dt) {
  const double t0 = tr.t_s.front();
  const int n = static_cast<int>(std::floor((tr.t_s.back() - t0) / dt)) + 1;
  std::vector<double> out(n);
  std::size_t j = 0;
  for (int i = 0; i < n; ++i) {
    const double t = t0 + i * dt;
    while (j + 2 < tr.t_s.size() && tr.t_s[j + 1] < t) ++j;
    const double a = (t - tr.t_s[j]) / (tr.t_s[j + 1] - tr.t_s[j]);
    out[i] = tr.ng[j] + std::clamp(a, 0.0, 1.0) * (tr.ng[j + 1] - tr.ng[j]);
  }
  return out;
}

void detrend(std::vector<double>& x, bool linear) {
  const int n = static_cast<int>(x.size());
  double sx = 0.0, st = 0.0, stt = 0.0, stx = 0.0;
  for (int i = 0; i < n; ++i) {
    sx += x[i];
    st += i;
    stt += static_cast<double>(i) * i;
    stx += i * x[i];
  }
  const double mean = sx / n, tmean = st / n;
  double slope = 0.0;
  if (linear) {
    const double var = stt / n - tmean * tmean;
    slope = var > 0.0 ? (stx / n - tmean * mean) / var : 0.0;
  }
  for (int i = 0; i < n; ++i) x[i] -= mean + slope * (i - tmean);
}

}  // namespace

PsdEstimate psd(const ChargeTrack& track, const PsdOptions& options) {
  const std::size_t n_in = track.t_s.size();
  if (n_in < 256) throw InvalidArgument("PSD needs at least 256 samples");
  if (track.ng.size() != n_in) throw InvalidArgument("charge track columns differ in length");
  for (std::size_t i = 1; i < n_in; ++i)
    if (!(track.t_s[i] > track.t_s[i - 1])) throw InvalidArgument("charge track times must increase");
  if (options.segments < 1) throw InvalidArgument("segments must be >= 1");
  if (!(options.overlap >= 0.0 && options.overlap < 1.0)) throw InvalidArgument("overlap must be in [0, 1)");
  if (options.detrend != "linear" && options.detrend != "mean")
    throw InvalidArgument("detrend must be 'linear' or 'mean'");
  if (options.window != "hann" && options.window != "rectangular")
    throw InvalidArgument("window must be 'hann' or 'rectangular'");

  PsdEstimate est;
  est.detrend = options.detrend;
  est.window = options.window;
  const double dt = (track.t_s.back() - track.t_s.front()) / (n_in - 1);
  std::vector<double> x = track.ng;
  for (std::size_t i = 1; i < n_in; ++i) {
    if (std::abs(track.t_s[i] - track.t_s[i - 1] - dt) > 0.01 * dt) {
      est.resampled = true;
      break;
    }
  }
  if (est.resampled) x = resample(track, dt);
  est.dt_s = dt;
  est.record_f_min_hz = 1.0 / (x.size() * dt);
  est.record_f_max_hz = 0.5 / dt;

  // Gap-free runs.
  std::vector<std::pair<int, int>> runs;
  for (int i = 0, n = static_cast<int>(x.size()); i < n;) {
    if (std::isnan(x[i])) {
      ++i;
      continue;
    }
    int j = i;
    while (j < n && !std::isnan(x[j])) ++j;
    runs.emplace_back(i, j - i);
    i = j;
  }
  if (runs.empty()) throw InvalidArgument("charge track has no valid samples");
  const int longest = std::max_element(runs.begin(), runs.end(), [](auto a, auto b) {
                        return a.second < b.second;
                      })->second;
  const double k = options.segments;
  int len = static_cast<int>(std::floor(longest / (k - (k - 1.0) * options.overlap)));
  len -= len % 2;
  if (len < 16) throw InvalidArgument("gap-free runs too short for the PSD segments");
  const int hop = std::max(1, static_cast<int>(std::lround(len * (1.0 - options.overlap))));
  est.segment_length = len;

  const int half = len / 2;
  // Periodic Hann; the density is normalized by the window power.
  std::vector<double> win(len, 1.0);
  if (options.window == "hann")
    for (int i = 0; i < len; ++i) win[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / len);
  double win_power = 0.0;
  for (double w : win) win_power += w * w;
  std::vector<double> acc(half + 1, 0.0);
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  double var_acc = 0.0;
  for (const auto& [start, size] : runs) {
    for (int s = start; s + len <= start + size; s += hop) {
      std::vector<double> seg(x.begin() + s, x.begin() + s + len);
      detrend(seg, options.detrend == "linear");
      double v = 0.0;
      for (double e : seg) v += e * e;
      var_acc += v / len;
      for (int i = 0; i < len; ++i) seg[i] *= win[i];
      fft.fwd(spec, seg);
      for (int q = 0; q <= half; ++q) {
        const double one_sided = (q == 0 || q == half) ? 1.0 : 2.0;
        acc[q] += one_sided * dt / win_power * std::norm(spec[q]);
      }
      ++est.segments_used;
    }
  }
  est.segment_variance = var_acc / est.segments_used;
  // The DC bin is dropped: it carries only window leakage of the removed mean.
  for (int q = 1; q <= half; ++q) {
    est.freq_hz.push_back(q / (len * dt));
    est.density.push_back(kChargeFactor * acc[q] / est.segments_used);
  }
  return est;
}

double psd_integral(const PsdEstimate& est) {
  if (est.freq_hz.empty()) return 0.0;
  const double df = est.freq_hz.front();
  double s = 0.0;
  for (double d : est.density) s += d * df;
  return s;
}

PowerLawFit fit_power_law(const PsdEstimate& est, double f_ref_hz, double f_lo_hz, double f_hi_hz) {
  if (!(f_lo_hz > 0.0 && f_hi_hz > f_lo_hz && f_ref_hz > 0.0))
    throw InvalidArgument("power-law fit needs 0 < f_lo < f_hi and f_ref > 0");
  if (est.freq_hz.empty()) throw InvalidArgument("empty PSD");
  if (f_lo_hz < est.freq_hz.front() * (1.0 - 1e-9) || f_hi_hz > est.freq_hz.back() * (1.0 + 1e-9))
    throw InvalidArgument("fit range outside the PSD grid");
  if (f_hi_hz / f_lo_hz < 10.0 * (1.0 - 1e-9)) throw InvalidArgument("fit range spans less than a decade");
  std::vector<double> lx, ly;
  double inv_sq = 0.0;
  for (std::size_t i = 0; i < est.freq_hz.size(); ++i) {
    const double f = est.freq_hz[i];
    if (f < f_lo_hz || f > f_hi_hz) continue;
    if (!(est.density[i] > 0.0)) throw InvalidArgument("non-positive density inside the fit range");
    inv_sq += est.density[i] * (f / f_ref_hz) * (f / f_ref_hz);
    lx.push_back(std::log10(f));
    ly.push_back(std::log10(est.density[i]));
  }
  const int n = static_cast<int>(lx.size());
  if (n < 3) throw InvalidArgument("fewer than 3 PSD points in the fit range");
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) mx += lx[i], my += ly[i];
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  PowerLawFit out;
  out.alpha = sxy / sxx;
  const double icpt = my - out.alpha * mx;
  double ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = ly[i] - (icpt + out.alpha * lx[i]);
    ss += r * r;
  }
  out.alpha_sigma = n > 2 ? std::sqrt(ss / (n - 2) / sxx) : 0.0;
  out.f_ref_hz = f_ref_hz;
  out.amplitude = std::pow(10.0, icpt + out.alpha * std::log10(f_ref_hz));
  out.amplitude_inverse_square = inv_sq / n;
  out.f_lo_hz = f_lo_hz;
  out.f_hi_hz = f_hi_hz;
  out.n_points = n;
  out.not_inverse_square = std::abs(out.alpha + 2.0) > 0.5;
  return out;
}

std::pair<double, double> default_fit_range(const PsdEstimate& est) {
  if (est.freq_hz.empty()) throw InvalidArgument("empty PSD");
  const double hi = std::min(0.3 * 0.5 / est.dt_s, est.freq_hz.back());
  return {est.freq_hz.front(), hi};
}

std::vector<double> power_law_line(double amplitude, double alpha, double f_ref_hz,
                                   const std::vector<double>& freq_hz) {
  std::vector<double> out;
  out.reserve(freq_hz.size());
  for (double f : freq_hz) out.push_back(amplitude * std::pow(f / f_ref_hz, alpha));
  return out;
}

}  // namespace qcharge
