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
#include <complex>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "qcharge/error.hpp"
#include "qcharge/spectral.hpp"

namespace qcharge {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> damped(const std::vector<double>& f, double t2, double dt, int n) {
  std::vector<double> x(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (double fk : f) x[i] += std::exp(-i * dt / t2) * std::cos(kTwoPi * fk * i * dt);
  return x;
}

TEST(FftMagnitude, MatchesDirectDft) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> g;
  std::vector<double> x(37);
  for (double& v : x) v = g(gen) + 0.4;
  const SpectrumEstimate s = fft_magnitude(x, 1e-3, 2, false);
  EXPECT_EQ(s.n_fft, 74);
  ASSERT_EQ(s.magnitude.size(), 38u);
  for (int k : {0, 1, 9, 37}) {
    std::complex<double> acc = 0.0;
    for (int i = 0; i < 37; ++i) acc += x[i] * std::polar(1.0, -kTwoPi * k * i / 74.0);
    EXPECT_NEAR(s.magnitude[k], std::abs(acc), 1e-10) << "bin " << k;
    EXPECT_NEAR(s.freq_hz[k], k / (74 * 1e-3), 1e-9);
  }
}

TEST(FftMagnitude, ParsevalWithPaddingAndMeanRemoval) {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> g(2.0, 1.0);
  std::vector<double> x(500);
  for (double& v : x) v = g(gen);
  double mean = 0.0;
  for (double v : x) mean += v / 500.0;
  double energy = 0.0;
  for (double v : x) energy += (v - mean) * (v - mean);
  for (int pad : {1, 4, 8}) {
    const SpectrumEstimate s = fft_magnitude(x, 1.0, pad);
    EXPECT_NEAR(spectrum_energy(s), energy, 1e-9 * energy) << "pad " << pad;
    EXPECT_NEAR(s.bin_hz(), 1.0 / (pad * 500.0), 1e-15);
    EXPECT_LT(s.magnitude[0], 1e-9);
  }
}

TEST(FftMagnitude, RejectsBadArguments) {
  EXPECT_THROW(fft_magnitude(std::vector<double>{1.0}, 1.0), InvalidArgument);
  EXPECT_THROW(fft_magnitude(std::vector<double>{1.0, 2.0}, 0.0), InvalidArgument);
  EXPECT_THROW(fft_magnitude(std::vector<double>{1.0, 2.0}, 1.0, 0), InvalidArgument);
}

TEST(FindPeaks, HighestMaximaSortedByFrequency) {
  const SpectrumEstimate s = fft_magnitude(damped({2e6, 5e6}, 3e-6, 10e-9, 800), 10e-9, 4);
  const std::vector<int> p = find_peaks(s, 2);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_NEAR(s.freq_hz[p[0]], 2e6, s.bin_hz());
  EXPECT_NEAR(s.freq_hz[p[1]], 5e6, s.bin_hz());
}

TEST(LorentzianFit, DampedCosineWidthAndCenter) {
  const double t2 = 2e-6, dt = 20e-9, f0 = 3e6;
  const SpectrumEstimate s = fft_magnitude(damped({f0}, t2, dt, 1000), dt, 8);
  const PeakFit fit = fit_lorentzian_peaks(s, 1);
  ASSERT_TRUE(fit.converged);
  ASSERT_EQ(fit.peaks.size(), 1u);
  // The continuous line shape ignores the sampling; that leaves a few percent
  // of the half-width.
  const double hw = 1.0 / (kTwoPi * t2);
  EXPECT_NEAR(fit.peaks[0].center_hz, f0, 0.03 * hw);
  EXPECT_NEAR(fit.peaks[0].half_width_hz, hw, 0.05 * hw);
  EXPECT_FALSE(fit.overlapping);
}

TEST(CoherentFit, CloseDoubletWithoutRepulsion) {
  // Two lines 1.9 half-widths apart: the power sum pushes them apart.
  const double t2 = 2e-6, dt = 20e-9, f1 = 3.0e6, f2 = 3.15e6;
  const SpectrumEstimate s = fft_magnitude(damped({f1, f2}, t2, dt, 1000), dt, 8);
  const PeakFit power = fit_lorentzian_peaks(s, 2, {f1, f2});
  const PeakFit coherent = fit_coherent_peaks(s, power);
  ASSERT_TRUE(coherent.converged);
  ASSERT_EQ(coherent.peaks.size(), 2u);
  const double err_power = std::abs((power.peaks[1].center_hz - power.peaks[0].center_hz) - (f2 - f1));
  const double err_coherent = std::abs((coherent.peaks[1].center_hz - coherent.peaks[0].center_hz) - (f2 - f1));
  const double hw = 1.0 / (kTwoPi * t2);
  EXPECT_LT(err_coherent, 0.03 * hw);
  EXPECT_LT(10.0 * err_coherent, err_power);
  for (const Peak& p : coherent.peaks) EXPECT_NEAR(p.half_width_hz, hw, 0.05 * hw);
}

TEST(CoherentFit, OppositeSignAmplitudes) {
  const double t2 = 3e-6, dt = 20e-9;
  std::vector<double> x = damped({2.5e6}, t2, dt, 1500);
  const std::vector<double> y = damped({2.7e6}, t2, dt, 1500);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] -= 0.6 * y[i];
  const SpectrumEstimate s = fft_magnitude(x, dt, 8);
  const PeakFit coherent = fit_coherent_peaks(s, fit_lorentzian_peaks(s, 2));
  ASSERT_TRUE(coherent.converged);
  const double hw = 1.0 / (kTwoPi * t2);
  EXPECT_NEAR(coherent.peaks[0].center_hz, 2.5e6, 0.03 * hw);
  EXPECT_NEAR(coherent.peaks[1].center_hz, 2.7e6, 0.03 * hw);
  EXPECT_NEAR(coherent.peaks[1].amplitude / coherent.peaks[0].amplitude, 0.36, 0.02);
}

TEST(PairDoublets, NearestNeighbours) {
  PeakFit f;
  for (double c : {1.0e6, 1.1e6, 3.0e6, 3.05e6}) f.peaks.push_back({c, 1e4, 1.0});
  const auto pairs = pair_doublets(f);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0], std::make_pair(0, 1));
  EXPECT_EQ(pairs[1], std::make_pair(2, 3));
}

}  // namespace
}  // namespace qcharge
