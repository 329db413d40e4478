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

#include "qcharge/ramsey.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "qcharge/error.hpp"
#include "qcharge/optimize.hpp"

namespace qcharge {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

void RamseyTrace::validate() const {
  if (tau_s.empty()) throw InvalidArgument("empty Ramsey trace");
  if (tau_s.size() != i_quadrature.size()) throw InvalidArgument("tau and I lengths differ");
  for (std::size_t i = 1; i < tau_s.size(); ++i)
    if (!(tau_s[i] > tau_s[i - 1])) throw InvalidArgument("tau must be strictly increasing");
}

double RamseyTrace::uniform_step() const {
  validate();
  if (tau_s.size() < 2) throw InvalidArgument("need at least two delays");
  const double dt = (tau_s.back() - tau_s.front()) / (tau_s.size() - 1);
  for (std::size_t i = 1; i < tau_s.size(); ++i)
    if (std::abs(tau_s[i] - tau_s[i - 1] - dt) > 1e-9 * dt)
      throw InvalidArgument("tau grid is not uniform");
  return dt;
}

double RamseyTrace::span() const { return uniform_step() * tau_s.size(); }

std::vector<double> uniform_grid(double step_s, int n) {
  if (!(step_s > 0.0) || n < 1) throw InvalidArgument("grid needs step > 0 and n >= 1");
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = i * step_s;
  return g;
}

RamseyTrace synth_ramsey(const RamseyModel& m, const std::vector<double>& tau, double noise_sigma,
                         std::uint64_t seed) {
  if (tau.empty()) throw InvalidArgument("empty delay grid");
  if (!(m.t2_s > 0.0)) throw InvalidArgument("t2 must be positive");
  if (m.w1 < 0.0 || m.w2 < 0.0) throw InvalidArgument("weights must be >= 0");
  if (noise_sigma < 0.0) throw InvalidArgument("noise_sigma must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  RamseyTrace t;
  t.tau_s = tau;
  t.i_quadrature.resize(tau.size());
  for (std::size_t i = 0; i < tau.size(); ++i) {
    const double s = tau[i];
    t.i_quadrature[i] = std::exp(-s / m.t2_s) *
                        (m.w1 * std::cos(kTwoPi * m.f1_hz * s) + m.w2 * std::cos(kTwoPi * m.f2_hz * s));
    if (noise_sigma > 0.0) t.i_quadrature[i] += noise_sigma * noise(rng);
  }
  t.validate();
  return t;
}

SpectrumEstimate fft_magnitude(const RamseyTrace& trace, int pad_factor) {
  return fft_magnitude(trace.i_quadrature, trace.uniform_step(), pad_factor, true);
}

RamseyFit time_domain_fit(const RamseyTrace& trace) {
  const double dt = trace.uniform_step();
  const double span = trace.span();
  const SpectrumEstimate spec = fft_magnitude(trace, 8);
  const auto top_peaks = find_peaks(spec, 1);
  if (top_peaks.empty()) throw InvalidArgument("no spectral peak in the Ramsey trace");
  const int top = top_peaks.front();
  // Require >= 4 periods of the dominant component.
  if (spec.freq_hz[top] * span < 4.0) throw InvalidArgument("fewer than 4 oscillation periods in span");

  // Envelope start: amplitude of the first samples, T2 from the peak width.
  const PeakFit pf = fit_lorentzian_peaks(spec, 1, {spec.freq_hz[top]});
  const double t2_0 = std::clamp(1.0 / (kTwoPi * pf.peaks[0].half_width_hz), 2.0 * dt, 10.0 * span);
  const double a0 = std::max(std::abs(trace.i_quadrature.front()), 1e-12);
  const double bin = spec.bin_hz();

  const Eigen::Map<const Eigen::VectorXd> tau(trace.tau_s.data(), trace.tau_s.size());
  const Eigen::Map<const Eigen::VectorXd> y(trace.i_quadrature.data(), trace.i_quadrature.size());
  auto model = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const Eigen::ArrayXd env = (-tau.array() / x(1)).exp();
    Eigen::ArrayXd v = x(2) * (kTwoPi * x(0) * tau.array()).cos();
    if (x.size() == 5) v += x(4) * (kTwoPi * x(3) * tau.array()).cos();
    return (env * v).matrix();
  };
  ResidualFn f = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    if (!(x(1) > 0.0)) throw InvalidArgument("t2 must stay positive");
    return model(x) - y;
  };
  OptimizeOptions opts;
  opts.max_simplex_iterations = 200;

  // Single cosine first; the second line is looked for in its residual, where
  // the truncation sidelobes of the first one no longer compete.
  opts.scale = Eigen::Vector3d(bin, t2_0, a0);
  const OptimizeResult one = least_squares(f, Eigen::Vector3d(spec.freq_hz[top], t2_0, a0), opts);

  OptimizeResult best = one;
  bool two = false;
  const Eigen::VectorXd rest = -one.residuals;
  const SpectrumEstimate rspec = fft_magnitude(std::vector<double>(rest.data(), rest.data() + rest.size()), dt, 8);
  const auto second = find_peaks(rspec, 1);
  if (!second.empty()) {
    Eigen::VectorXd x0(5), scale(5);
    x0 << one.x(0), one.x(1), one.x(2), rspec.freq_hz[second.front()], 0.5 * std::abs(one.x(2));
    scale << bin, one.x(1), a0, bin, a0;
    opts.scale = scale;
    const OptimizeResult pair = least_squares(f, x0, opts);
    // Two lines only when resolved and the second weight is significant.
    const bool resolved = std::abs(pair.x(3) - pair.x(0)) >= 1.0 / span;
    const bool significant = pair.sigma.size() == 5 && std::abs(pair.x(4)) > 3.0 * pair.sigma(4) &&
                             std::abs(pair.x(4)) > 0.02 * std::abs(pair.x(2));
    if (pair.converged && resolved && significant && pair.cost < one.cost) {
      best = pair;
      two = true;
    }
  }

  RamseyFit out;
  out.single_frequency = !two;
  out.converged = best.converged;
  out.rms_residual = std::sqrt(best.cost / y.size());
  out.model.f1_hz = best.x(0);
  out.model.t2_s = best.x(1);
  out.model.w1 = best.x(2);
  if (two) {
    out.model.f2_hz = best.x(3);
    out.model.w2 = best.x(4);
  } else {
    out.model.f2_hz = best.x(0);
    out.model.w2 = 0.0;
  }
  // Negative weights are a pi phase; keep weights >= 0 by folding the sign.
  out.model.w1 = std::abs(out.model.w1);
  out.model.w2 = std::abs(out.model.w2);
  if (out.model.f1_hz > out.model.f2_hz) {
    std::swap(out.model.f1_hz, out.model.f2_hz);
    std::swap(out.model.w1, out.model.w2);
  }
  return out;
}

double ng_to_splitting(double n_g, double delta_f_hz, int level) {
  const double sign = (level % 2 == 0) ? -1.0 : 1.0;  // (-1)^(level+1)
  return sign * delta_f_hz * std::cos(kTwoPi * n_g);
}

ChargeOffsetEstimate splitting_to_ng(double f_even_hz, double f_odd_hz, double delta_f_hz,
                                     double peak_sigma_hz, int level) {
  if (!(delta_f_hz > 0.0)) throw InvalidArgument("delta_f must be positive");
  if (peak_sigma_hz < 0.0) throw InvalidArgument("peak_sigma must be >= 0");
  const double sign = (level % 2 == 0) ? -1.0 : 1.0;
  const double split = sign * (f_odd_hz - f_even_hz);
  if (std::abs(split) > delta_f_hz * 1.05)
    throw InvalidArgument("parity splitting exceeds the charge dispersion; dispersion mis-calibrated");
  auto invert = [&](double s) {
    return std::acos(std::clamp(s / delta_f_hz, -1.0, 1.0)) / kTwoPi;
  };
  ChargeOffsetEstimate out;
  out.clamped = std::abs(split) > delta_f_hz;
  out.n_g = invert(split);
  if (peak_sigma_hz > 0.0) {
    const double s = std::sqrt(2.0) * peak_sigma_hz;
    const double lo = invert(split + s), hi = invert(split - s);
    out.uncertainty = std::max(out.n_g - lo, hi - out.n_g);
  }
  return out;
}

}  // namespace qcharge
