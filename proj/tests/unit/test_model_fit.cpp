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

#include <gtest/gtest.h>

#include "qcharge/error.hpp"
#include "qcharge/model_fit.hpp"
#include "qcharge/units.hpp"

namespace qcharge {
namespace {

CircuitParams truth() {
  CircuitParams c;
  c.e_c = 0.2171;
  c.e_j = {15.9, -0.227, -0.0169};
  return c;
}

// Transitions 0-1 .. 4-5 of both parities at n_g = 0, from the model itself.
TransitionSet synthetic(const CircuitParams& c) {
  TransitionSet like;
  like.provenance = Provenance::measured;
  for (Parity p : {Parity::even, Parity::odd})
    for (int i = 0; i < 5; ++i) like.entries.push_back({i, i + 1, 1.0, p, 0.0});
  const Eigen::VectorXd f = predict_frequencies(c, like, SolverConfig{});
  for (std::size_t i = 0; i < like.entries.size(); ++i) like.entries[i].freq_ghz = f(i);
  return like;
}

TEST(Predict, MatchesTransitionFrequencies) {
  CircuitParams c = truth();
  c.n_g = 0.2;
  c.parity = Parity::odd;
  const TransitionSet direct = transition_frequencies(c, SolverConfig{});
  TransitionSet like;
  like.entries.push_back({0, 1, 1.0, Parity::odd, 0.2});
  like.entries.push_back({0, 2, 1.0, Parity::odd, 0.2});
  const Eigen::VectorXd f = predict_frequencies(truth(), like, SolverConfig{});
  EXPECT_NEAR(f(0), direct.entries[0].freq_ghz, 1e-12);
  EXPECT_NEAR(f(1), direct.entries[0].freq_ghz + direct.entries[1].freq_ghz, 1e-12);
}

TEST(Predict, ShuntedNeedsZeroOffset) {
  CircuitParams c = truth();
  c.e_l = 0.02;
  TransitionSet like;
  like.entries.push_back({0, 1, 1.0, Parity::even, 0.1});
  EXPECT_THROW(predict_frequencies(c, like, SolverConfig{}), InvalidArgument);
}

TEST(DefaultGuess, TransmonRelations) {
  TransitionSet s;
  s.entries.push_back({0, 1, 5.0, Parity::even, 0.0});
  s.entries.push_back({1, 2, 4.8, Parity::even, 0.0});
  const CircuitParams g = default_guess(s, 3);
  EXPECT_NEAR(g.e_c, 0.2, 1e-12);
  EXPECT_NEAR(g.e_j[0], 25.0 / 1.6, 1e-12);
  EXPECT_EQ(g.e_j.size(), 3u);
  EXPECT_EQ(g.e_j[1], 0.0);
}

TEST(FitHarmonics, RecoversNoiselessParameters) {
  const TransitionSet data = synthetic(truth());
  const FitReport r = fit_harmonics_staged(data, 3);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.model, "H3");
  EXPECT_NEAR(r.params.e_c, 0.2171, 1e-6);
  EXPECT_NEAR(r.params.e_j[0], 15.9, 1e-4);
  EXPECT_NEAR(r.params.e_j[1], -0.227, 1e-4);
  EXPECT_NEAR(r.params.e_j[2], -0.0169, 1e-4);
  EXPECT_LT(r.rms_mhz, 1e-3);
  EXPECT_EQ(r.residuals_mhz.size(), data.entries.size());
  EXPECT_EQ(r.sigma.size(), 4u);
}

TEST(FitHarmonics, ResidualsArePredictedMinusMeasured) {
  TransitionSet data = synthetic(truth());
  CircuitParams g = truth();
  g.e_c *= 1.01;
  FitOptions o;
  o.optimizer.max_simplex_iterations = 0;
  o.optimizer.max_lm_iterations = 0;
  const FitReport r = fit_harmonics(data, 3, g, o);
  const Eigen::VectorXd pred = predict_frequencies(g, data, SolverConfig{});
  for (std::size_t i = 0; i < data.entries.size(); ++i)
    EXPECT_NEAR(r.residuals_mhz[i], (pred(i) - data.entries[i].freq_ghz) * 1e3, 1e-6);
}

TEST(FitHarmonics, RejectsBadInputs) {
  TransitionSet data = synthetic(truth());
  EXPECT_THROW(fit_harmonics(data, 6, truth()), InvalidArgument);
  FitOptions o;
  o.weights = {1.0, 2.0};
  EXPECT_THROW(fit_harmonics(data, 3, truth(), o), InvalidArgument);
  data.entries.resize(3);
  EXPECT_THROW(fit_harmonics(data, 3, truth()), InvalidArgument);
}

TEST(FitHarmonics, SecondHarmonicMapsToSeriesInductance) {
  // Published fits: N=5 gives E_J2 = -0.0116 at E_J = 15.6, N=3 gives -0.227 at 15.9.
  EXPECT_NEAR(units::series_inductance(-0.0116, 15.6).magnitude_henry, 30e-12, 3e-12);
  EXPECT_NEAR(units::series_inductance(-0.227, 15.9).magnitude_henry, 590e-12, 59e-12);
  EXPECT_TRUE(units::series_inductance(-0.227, 15.9).negative_harmonic);
}

TEST(ElSweep, SmallGridIsOrderedAndConsistent) {
  const TransitionSet data = synthetic(truth());
  FitOptions o;
  o.solver.osc_dim = 160;
  const ElSweepResult sw = el_sweep(data, {0.0, 0.004, 0.02}, 3, o);
  ASSERT_EQ(sw.points.size(), 3u);
  EXPECT_EQ(sw.grid(), (std::vector<double>{0.0, 0.004, 0.02}));
  for (const auto& p : sw.points) EXPECT_TRUE(p.ok) << p.failure;
  // With no shunt the removed prediction is the parity average of the fit itself.
  CircuitParams odd = sw.points[0].fit.params;
  odd.parity = Parity::odd;
  const double f_even = transition_frequencies(sw.points[0].fit.params, SolverConfig{}).entries[0].freq_ghz;
  const double f_odd = transition_frequencies(odd, SolverConfig{}).entries[0].freq_ghz;
  EXPECT_NEAR(sw.points[0].removed.entries[0].freq_ghz, 0.5 * (f_even + f_odd), 1e-9);
  // The shunt stiffens the well, so the fit lowers E_J1 and the removed f01 falls.
  EXPECT_LT(sw.points[2].fit.params.e_j[0], sw.points[1].fit.params.e_j[0]);
  EXPECT_LT(sw.points[2].removed.entries[0].freq_ghz, sw.points[1].removed.entries[0].freq_ghz);
  EXPECT_EQ(sw.points[2].fit.model, "Hfull");
}

TEST(ElSweep, DefaultGridIsLogSpaced) {
  const std::vector<double> g = default_el_grid();
  ASSERT_EQ(g.size(), 60u);
  EXPECT_NEAR(g.front(), 1e-3, 1e-15);
  EXPECT_NEAR(g.back(), 2.0, 1e-12);
  for (std::size_t i = 2; i < g.size(); ++i) EXPECT_NEAR(g[i] / g[i - 1], g[1] / g[0], 1e-9);
}

ElSweepPoint point(double e_l, double f01, bool ok = true) {
  ElSweepPoint p;
  p.e_l = e_l;
  p.ok = ok;
  p.removed.entries.push_back({0, 1, f01, Parity::even, 0.0});
  return p;
}

TEST(InductanceBound, LargestGridPointInsideBand) {
  ElSweepResult sw;
  sw.points = {point(0.001, 5.00), point(0.01, 4.95), point(0.1, 4.90, false), point(0.5, 4.90), point(1.0, 4.5)};
  FrequencyBand band;
  band.intervals.push_back({0, 1, 4.90, 5.10});
  const InductanceBound b = inductance_bound(sw, band);
  EXPECT_DOUBLE_EQ(b.e_l_max, 0.5);  // edge is inclusive; failed points are skipped
  EXPECT_FALSE(b.unbounded_below_grid);
  EXPECT_NEAR(b.l_min_henry, units::el_to_inductance(0.5), 1e-20);

  band.intervals[0].min_ghz = 5.05;
  const InductanceBound none = inductance_bound(sw, band);
  EXPECT_TRUE(none.unbounded_below_grid);
  EXPECT_DOUBLE_EQ(none.e_l_max, 0.001);
}

TEST(FluxDispersionBound, InvertsTheShiftEstimate) {
  for (double e_l : {0.003, 0.03, 0.3}) {
    const double shift = flux_shift_estimate(e_l, 15.9, 4.96, 1.0);
    EXPECT_NEAR(flux_dispersion_bound(15.9, 4.96, shift), e_l, 1e-12);
  }
}

}  // namespace
}  // namespace qcharge
