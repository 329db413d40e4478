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

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "qcharge/error.hpp"
#include "qcharge/noise_psd.hpp"

namespace qcharge {
namespace {

ChargeTrack white(double sigma, double dt, int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g(0.0, sigma);
  ChargeTrack t;
  for (int i = 0; i < n; ++i) {
    t.t_s.push_back(i * dt);
    t.ng.push_back(0.3 + g(gen));
    t.ng_err.push_back(1e-3);
    t.jump.push_back(0);
  }
  return t;
}

PsdEstimate exact(double c, double k, int n = 200) {
  PsdEstimate e;
  e.dt_s = 1.0;
  for (int i = 1; i <= n; ++i) {
    e.freq_hz.push_back(i * 1e-3);
    e.density.push_back(c * std::pow(i * 1e-3, k));
  }
  return e;
}

TEST(Psd, WhiteNoiseLevel) {
  // One-sided n_g density 2 sigma^2 dt, four times that for q = 2e n_g.
  const double sigma = 0.01, dt = 60.0;
  for (const char* window : {"hann", "rectangular"}) {
    PsdOptions o;
    o.window = window;
    const PsdEstimate e = psd(white(sigma, dt, 20000, 1), o);
    double mean = 0.0;
    for (double d : e.density) mean += d / e.density.size();
    EXPECT_NEAR(mean, 4.0 * 2.0 * sigma * sigma * dt, 0.03 * 4.0 * 2.0 * sigma * sigma * dt) << window;
    EXPECT_EQ(e.segments_used, 4);
    EXPECT_NEAR(e.freq_hz.front(), 1.0 / (e.segment_length * dt), 1e-15);
    EXPECT_NEAR(e.freq_hz.back(), 0.5 / dt, 1e-12);
  }
}

TEST(Psd, ParsevalAgainstSegmentVariance) {
  const PsdEstimate e = psd(white(0.02, 1.0, 16384, 2));
  EXPECT_NEAR(psd_integral(e), 4.0 * e.segment_variance, 0.05 * 4.0 * e.segment_variance);
  EXPECT_NEAR(e.segment_variance, 4e-4, 0.05 * 4e-4);
}

TEST(Psd, RandomWalkSlopeAndWhiteSlope) {
  double alpha_rw = 0.0, alpha_w = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const PsdEstimate rw = psd(simulate_charge_drift(0.003, 60.0, 4096, 50 + s));
    auto [lo, hi] = default_fit_range(rw);
    alpha_rw += fit_power_law(rw, 1e-4, lo, hi).alpha / 5.0;
    const PsdEstimate w = psd(white(0.01, 60.0, 4096, 70 + s));
    std::tie(lo, hi) = default_fit_range(w);
    alpha_w += fit_power_law(w, 1e-4, lo, hi).alpha / 5.0;
  }
  EXPECT_NEAR(alpha_rw, -2.0, 0.1);
  EXPECT_NEAR(alpha_w, 0.0, 0.1);
}

TEST(Psd, CalibratedRandomWalkAmplitude) {
  const double target = 2e-3, f_ref = 1e-4, dt = 60.0;
  const double sigma = calibrate_step_sigma(target, f_ref, dt);
  double amp = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const PsdEstimate e = psd(simulate_charge_drift(sigma, dt, 4096, 200 + s));
    auto [lo, hi] = default_fit_range(e);
    amp += fit_power_law(e, f_ref, lo, hi).amplitude_inverse_square / 10.0;
  }
  EXPECT_NEAR(amp, target, 0.1 * target);
}

TEST(Psd, SegmentsStayInsideGapFreeRuns) {
  ChargeTrack t = white(0.01, 1.0, 3000, 3);
  for (int i = 1000; i < 1100; ++i) t.ng[i] = std::numeric_limits<double>::quiet_NaN();
  const PsdEstimate e = psd(t);
  EXPECT_FALSE(e.resampled);
  EXPECT_EQ(e.segment_length, 1900 * 2 / 5 - (1900 * 2 / 5) % 2);
  for (double d : e.density) EXPECT_TRUE(std::isfinite(d));
}

TEST(Psd, RejectsBadInput) {
  EXPECT_THROW(psd(white(0.01, 1.0, 100, 1)), InvalidArgument);
  PsdOptions o;
  o.window = "blackman";
  EXPECT_THROW(psd(white(0.01, 1.0, 1000, 1), o), InvalidArgument);
  o = {};
  o.detrend = "none";
  EXPECT_THROW(psd(white(0.01, 1.0, 1000, 1), o), InvalidArgument);
  o = {};
  o.overlap = 1.0;
  EXPECT_THROW(psd(white(0.01, 1.0, 1000, 1), o), InvalidArgument);
}

TEST(PowerLawFit, ExactPowerLaws) {
  for (double k : {0.0, -1.0, -2.0}) {
    const PsdEstimate e = exact(3e-3, k);
    const PowerLawFit f = fit_power_law(e, 1e-2, 1e-3, 0.2);
    EXPECT_NEAR(f.alpha, k, 1e-12);
    EXPECT_NEAR(f.amplitude, 3e-3 * std::pow(1e-2, k), 1e-12 * f.amplitude);
    EXPECT_LT(f.alpha_sigma, 1e-10);
    EXPECT_EQ(f.n_points, 200);
    EXPECT_EQ(f.not_inverse_square, std::abs(k + 2.0) > 0.5);
  }
  const PowerLawFit f = fit_power_law(exact(3e-3, -2.0), 1e-2, 1e-3, 0.2);
  EXPECT_NEAR(f.amplitude_inverse_square, 3e-3 / 1e-4, 1e-9);
}

TEST(PowerLawFit, RangeChecks) {
  const PsdEstimate e = exact(1.0, -2.0);
  EXPECT_THROW(fit_power_law(e, 1e-2, 1e-2, 5e-2), InvalidArgument);  // under a decade
  EXPECT_THROW(fit_power_law(e, 1e-2, 1e-4, 0.2), InvalidArgument);   // outside the grid
  EXPECT_THROW(fit_power_law(e, 0.0, 1e-3, 0.2), InvalidArgument);
}

TEST(PowerLawFit, DefaultRangeAndLine) {
  PsdEstimate e = exact(1.0, -2.0);
  e.dt_s = 2.0;  // Nyquist 0.25 Hz
  const auto [lo, hi] = default_fit_range(e);
  EXPECT_DOUBLE_EQ(lo, 1e-3);
  EXPECT_DOUBLE_EQ(hi, 0.075);
  e.dt_s = 0.1;
  EXPECT_DOUBLE_EQ(default_fit_range(e).second, 0.2);  // capped at the last bin
  const std::vector<double> line = power_law_line(2.0, -2.0, 0.1, {0.05, 0.1, 0.2});
  EXPECT_NEAR(line[0], 8.0, 1e-12);
  EXPECT_NEAR(line[1], 2.0, 1e-12);
  EXPECT_NEAR(line[2], 0.5, 1e-12);
}

}  // namespace
}  // namespace qcharge
