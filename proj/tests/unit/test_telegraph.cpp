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
#include <map>

#include <gtest/gtest.h>

#include "qcharge/error.hpp"
#include "qcharge/telegraph.hpp"

namespace qcharge {
namespace {

TelegraphParams base(int n = 200000) {
  TelegraphParams p;
  p.gamma_ps_hz = 8e3;
  p.mean_interval_s = 12e-6;
  p.n_samples = n;
  return p;
}

TEST(SimulateTelegraph, SeededAndConsistent) {
  TelegraphParams p = base(5000);
  p.jitter = 0.5;
  const TelegraphSimulation a = simulate_telegraph(p, 17), b = simulate_telegraph(p, 17);
  EXPECT_EQ(a.trace.values, b.trace.values);
  EXPECT_EQ(a.trace.t_s, b.trace.t_s);
  long long odd = 0;
  for (std::size_t i = 0; i < a.odd.size(); ++i) {
    odd += a.odd[i];
    EXPECT_EQ(a.trace.values[i], a.odd[i] ? p.i_odd : p.i_even);
  }
  EXPECT_DOUBLE_EQ(a.realized_odd_fraction, odd / 5000.0);
  EXPECT_NO_THROW(a.trace.validate());
}

TEST(SimulateTelegraph, RegularGridWithoutJitter) {
  const TelegraphSimulation s = simulate_telegraph(base(100), 1);
  for (int i = 0; i < 100; ++i) EXPECT_NEAR(s.trace.t_s[i], i * 12e-6, 1e-15);
  EXPECT_NEAR(s.trace.mean_interval(), 12e-6, 1e-18);
}

TEST(SimulateTelegraph, StationaryFractionAndNoSwitchingWithoutRate) {
  TelegraphParams p = base();
  p.p_even = 0.7;
  const TelegraphSimulation s = simulate_telegraph(p, 3);
  EXPECT_NEAR(s.realized_odd_fraction, 0.3, 0.02);
  p.gamma_ps_hz = 0.0;
  p.n_samples = 1000;
  const TelegraphSimulation frozen = simulate_telegraph(p, 4);
  for (auto o : frozen.odd) EXPECT_EQ(o, frozen.odd.front());
}

TEST(SimulateTelegraph, RejectsUnresolvableSwitching) {
  TelegraphParams p = base(100);
  p.gamma_ps_hz = 0.5 / p.mean_interval_s;
  EXPECT_THROW(simulate_telegraph(p, 1), InvalidArgument);
  p = base(100);
  p.p_even = 1.2;
  EXPECT_THROW(simulate_telegraph(p, 1), InvalidArgument);
}

// Oracle: every pair within reach, binned by rounding the separation.
TEST(Autocorrelation, MatchesBruteForcePairs) {
  TelegraphParams p = base(400);
  p.jitter = 1.0;
  p.noise_sigma = 0.2;
  const TelegraphTrace tr = simulate_telegraph(p, 8).trace;
  const double bin = tr.mean_interval();
  const int n_lags = 6;
  const Autocorrelation ac = autocorrelation(tr, (n_lags - 1) * bin + 1e-12, 4);
  std::map<int, std::pair<double, long long>> want;
  for (std::size_t i = 0; i < tr.values.size(); ++i) {
    want[-1].first += tr.values[i] * tr.values[i];
    want[-1].second += 1;
    for (std::size_t j = i + 1; j < tr.values.size(); ++j) {
      const double d = tr.t_s[j] - tr.t_s[i];
      if (d <= (n_lags - 0.5) * bin) {
        want[static_cast<int>(std::lround(d / bin))].first += tr.values[i] * tr.values[j];
        want[static_cast<int>(std::lround(d / bin))].second += 1;
      }
    }
  }
  ASSERT_EQ(ac.c.size(), want.size());
  std::size_t k = 0;
  for (const auto& [lag, sc] : want) {
    EXPECT_EQ(ac.counts[k], sc.second) << "lag " << lag;
    EXPECT_NEAR(ac.c[k], sc.first / sc.second, 1e-12) << "lag " << lag;
    ++k;
  }
  EXPECT_FALSE(ac.warnings.empty());  // short record
}

TEST(Autocorrelation, StationaryTelegraphDecay) {
  // C(t) = (p_e - p_o)^2 + 4 p_e p_o exp(-2 gamma t) for levels +-1.
  TelegraphParams p = base();
  p.p_even = 0.65;
  const Autocorrelation ac = autocorrelation(simulate_telegraph(p, 21).trace, 20 * p.mean_interval_s);
  const double bias = (0.65 - 0.35) * (0.65 - 0.35), amp = 4 * 0.65 * 0.35;
  for (std::size_t k = 1; k < ac.c.size(); ++k) {
    const double want = bias + amp * std::exp(-2 * p.gamma_ps_hz * ac.lag_s[k]);
    EXPECT_NEAR(ac.c[k], want, 5 * ac.std_error[k] + 0.01) << "bin " << k;
  }
  EXPECT_NEAR(ac.c[0], 1.0, 1e-12);
}

TEST(StretchedExponential, RecoversMarkovRate) {
  TelegraphParams p = base(400000);
  p.jitter = 1.0;
  p.noise_sigma = 0.3;
  const Autocorrelation ac = autocorrelation(simulate_telegraph(p, 5).trace, 30 * p.mean_interval_s);
  const AutocorrFit f = fit_stretched_exponential(ac);
  ASSERT_TRUE(f.converged);
  EXPECT_NEAR(f.gamma_ps_hz, 8e3, 0.05 * 8e3);
  EXPECT_NEAR(f.markov_gamma_hz, 8e3, 0.05 * 8e3);
  EXPECT_NEAR(f.beta, 1.0, 0.05);
  EXPECT_GT(f.gamma_sigma_hz, 0.0);
  EXPECT_LT(std::abs(f.gamma_ps_hz - 8e3), 4 * f.gamma_sigma_hz + 100.0);
}

TEST(StretchedExponential, NeedsDecay) {
  Autocorrelation ac;
  for (int k = 0; k < 10; ++k) {
    ac.lag_s.push_back(k * 1e-5);
    ac.c.push_back(1.0);
    ac.std_error.push_back(0.01);
    ac.counts.push_back(1000);
  }
  EXPECT_THROW(fit_stretched_exponential(ac), InvalidArgument);
}

TEST(Imbalance, CorrectsMisclassification) {
  TelegraphParams p = base();
  p.p_even = 0.7;
  p.noise_sigma = 0.6;  // about 5% of shots land on the wrong side
  const TelegraphSimulation s = simulate_telegraph(p, 12);
  const Imbalance im = estimate_imbalance(s.trace, 1.0, -1.0);
  EXPECT_NEAR(im.p_even + im.p_odd, 1.0, 1e-12);
  EXPECT_GT(im.misclassification, 0.03);
  EXPECT_LT(im.misclassification, 0.07);
  EXPECT_GT(im.uncertainty, 0.0);
  EXPECT_NEAR(im.p_even, 1.0 - s.realized_odd_fraction, 3 * im.uncertainty);
  EXPECT_NEAR(im.level_even, 1.0, 0.05);
  EXPECT_NEAR(im.level_odd, -1.0, 0.05);
}

TEST(Imbalance, UnbiasedOverSeeds) {
  TelegraphParams p = base(200000);
  p.p_even = 0.54;
  p.noise_sigma = 0.7;
  double mean_err = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    const TelegraphSimulation s = simulate_telegraph(p, 100 + seed);
    mean_err += (estimate_imbalance(s.trace, 1.0, -1.0).p_even - (1.0 - s.realized_odd_fraction)) / 20.0;
  }
  EXPECT_LT(std::abs(mean_err), 0.002);
}

TEST(Imbalance, HintsPickTheLabels) {
  TelegraphParams p = base(20000);
  p.p_even = 0.8;
  p.i_even = -0.4;
  p.i_odd = 0.9;
  const TelegraphSimulation s = simulate_telegraph(p, 2);
  const Imbalance im = estimate_imbalance(s.trace, -0.4, 0.9);
  EXPECT_NEAR(im.p_even, 1.0 - s.realized_odd_fraction, 1e-9);
  EXPECT_THROW(estimate_imbalance(s.trace, 0.1, 0.1), InvalidArgument);
}

}  // namespace
}  // namespace qcharge
