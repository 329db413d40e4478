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

#include <benchmark/benchmark.h>

#include "qcharge/circuit.hpp"
#include "qcharge/model_fit.hpp"
#include "qcharge/noise_psd.hpp"
#include "qcharge/offset_tracker.hpp"
#include "qcharge/ramsey.hpp"
#include "qcharge/spectral.hpp"
#include "qcharge/telegraph.hpp"

namespace {

using namespace qcharge;

CircuitParams transmon(int order) {
  CircuitParams p;
  p.e_c = 0.3;
  p.e_j = {12.0, -0.4, 0.05, -0.01};
  p.e_j.resize(order);
  p.n_g = 0.17;
  return p;
}

void BM_ChargeBasis(benchmark::State& state) {
  const CircuitParams p = transmon(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(transition_frequencies(p, SolverConfig{}));
}
BENCHMARK(BM_ChargeBasis)->DenseRange(1, 4)->Unit(benchmark::kMicrosecond);

void BM_ShuntedBasis(benchmark::State& state) {
  CircuitParams p = transmon(3);
  p.e_l = 1e-3 * static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(transition_frequencies(p, SolverConfig{}));
}
BENCHMARK(BM_ShuntedBasis)->Arg(1)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_FitHarmonics(benchmark::State& state) {
  const TransitionSet measured = transition_frequencies(transmon(3), SolverConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(fit_harmonics_staged(measured, 3));
}
BENCHMARK(BM_FitHarmonics)->Unit(benchmark::kMillisecond);

void BM_RamseyFft(benchmark::State& state) {
  const RamseyModel m{3.0e6, 5.6e6, 2e-6, 1.0, 1.0};
  const RamseyTrace tr = synth_ramsey(m, uniform_grid(20e-9, static_cast<int>(state.range(0))), 0.02, 1);
  for (auto _ : state) benchmark::DoNotOptimize(fft_magnitude(tr, 8));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RamseyFft)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oNLogN);

void BM_LorentzianFit(benchmark::State& state) {
  const RamseyModel m{3.0e6, 5.6e6, 2e-6, 1.0, 1.0};
  const SpectrumEstimate s = fft_magnitude(synth_ramsey(m, uniform_grid(20e-9, 600), 0.02, 2), 8);
  for (auto _ : state) benchmark::DoNotOptimize(fit_lorentzian_peaks(s, 2));
}
BENCHMARK(BM_LorentzianFit)->Unit(benchmark::kMicrosecond);

void BM_Autocorrelation(benchmark::State& state) {
  TelegraphParams p;
  p.gamma_ps_hz = 8e3;
  p.mean_interval_s = 12e-6;
  p.n_samples = static_cast<int>(state.range(0));
  p.jitter = 0.5;
  p.noise_sigma = 0.3;
  const TelegraphTrace tr = simulate_telegraph(p, 3).trace;
  for (auto _ : state) benchmark::DoNotOptimize(autocorrelation(tr, 300 * p.mean_interval_s));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Autocorrelation)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_Imbalance(benchmark::State& state) {
  TelegraphParams p;
  p.gamma_ps_hz = 8e3;
  p.mean_interval_s = 12e-6;
  p.n_samples = 200000;
  p.noise_sigma = 0.6;
  const TelegraphTrace tr = simulate_telegraph(p, 4).trace;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_imbalance(tr, 1.0, -1.0));
}
BENCHMARK(BM_Imbalance)->Unit(benchmark::kMillisecond);

void BM_Psd(benchmark::State& state) {
  const ChargeTrack t = simulate_charge_drift(3e-3, 60.0, static_cast<int>(state.range(0)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(psd(t));
}
BENCHMARK(BM_Psd)->Arg(4096)->Arg(65536)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
