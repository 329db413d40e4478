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

// Synthetic datasets and the repro pipeline.

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "commands.hpp"
#include "qcharge/model_fit.hpp"
#include "qcharge/offset_tracker.hpp"
#include "qcharge/ramsey.hpp"
#include "qcharge/rng.hpp"
#include "qcharge/shunted.hpp"

namespace qcharge::cli {

namespace fs = std::filesystem;
using io::format_double;

namespace {

using Settings = std::vector<std::pair<std::string, std::string>>;

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

CircuitParams make_params(double e_c, std::vector<double> e_j, double e_l = 0.0) {
  CircuitParams p;
  p.e_c = e_c;
  p.e_j = std::move(e_j);
  p.e_l = e_l;
  return p;
}

// Published harmonic fits.
const CircuitParams kN5 = make_params(0.2165, {15.6, -0.0116, -0.122, 0.0676, -0.0191});
const CircuitParams kN3 = make_params(0.2171, {15.9, -0.227, -0.0169});

TransitionSet harmonics_dataset(const CircuitParams& truth, double noise_ghz, std::uint64_t seed) {
  TransitionSet out;
  out.provenance = Provenance::measured;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, noise_ghz);
  for (double ng : {0.0, 0.125, 0.25, 0.375}) {
    for (Parity par : {Parity::even, Parity::odd}) {
      CircuitParams p = truth;
      p.n_g = ng;
      p.parity = par;
      for (auto e : transition_frequencies(p, SolverConfig{}).entries) {
        e.freq_ghz += noise_ghz > 0.0 ? g(rng) : 0.0;
        out.entries.push_back(e);
      }
    }
  }
  return out;
}

// Shunted circuit observed at n_g = 0, and the band its unshunted twin
// would occupy (+-2.5 MHz around the parity-averaged frequencies).
std::pair<TransitionSet, FrequencyBand> shunt_dataset(const CircuitParams& truth) {
  TransitionSet data;
  data.provenance = Provenance::measured;
  const Eigen::VectorXd gaps = shunted_ladder(truth, 400, 5);
  for (int i = 0; i < 4; ++i) data.entries.push_back({i, i + 1, gaps(i), Parity::even, 0.0});
  CircuitParams removed = truth;
  removed.e_l = 0.0;
  removed.parity = Parity::even;
  const TransitionSet even = transition_frequencies(removed, SolverConfig{});
  removed.parity = Parity::odd;
  const TransitionSet odd = transition_frequencies(removed, SolverConfig{});
  FrequencyBand band;
  for (int i = 0; i < 4; ++i) {
    const double f = 0.5 * (even.entries[i].freq_ghz + odd.entries[i].freq_ghz);
    band.intervals.push_back({i, i + 1, f - 2.5e-3, f + 2.5e-3});
  }
  return {data, band};
}

constexpr double kDrive = 4.2084e9;
constexpr double kMean34 = 4.2034e9;
constexpr double kSplit34 = 2.0e6;

RamseyModel branch_model(double ng, double t2) {
  const double half = 0.5 * kSplit34 * std::abs(std::cos(2.0 * std::numbers::pi * ng));
  RamseyModel m;
  m.f1_hz = kDrive - (kMean34 + half);
  m.f2_hz = kDrive - (kMean34 - half);
  m.t2_s = t2;
  return m;
}

// Gate-voltage maps taken every 10 min while n_g0 drifts.
Spectrogram vdc_dataset(std::uint64_t seed) {
  constexpr int kBlocks = 24, kVolts = 25;
  constexpr double kPeriod = 12.0;
  std::vector<double> times, volts;
  std::vector<RamseyModel> models;
  for (int b = 0; b < kBlocks; ++b) {
    const double ng = 0.42 * std::sin(std::numbers::pi * b / (kBlocks - 1)) + 0.02 * std::cos(0.9 * b);
    for (int v = 0; v < kVolts; ++v) {
      const double vdc = -12.0 + 24.0 * v / (kVolts - 1);
      times.push_back(600.0 * b);
      volts.push_back(vdc);
      models.push_back(branch_model(ng + vdc / kPeriod, 3e-6));
    }
  }
  Spectrogram s = spectrogram_from_ramsey(times, models, uniform_grid(10e-9, 800), 0.05, seed);
  s.vdc_v = volts;
  s.drive_hz = kDrive;
  s.run_label = "synthetic-vdc";
  return s;
}

// Repeated Ramsey spectra at pinned n_g = 0 with a few blanked rows.
Spectrogram pinned_dataset(std::uint64_t seed) {
  std::vector<double> times;
  std::vector<RamseyModel> models;
  for (int r = 0; r < 60; ++r) {
    times.push_back(17.0 * r);
    RamseyModel m = branch_model(0.0, 1.4e-6);
    if (r % 15 == 7) m.t2_s = 0.0;
    models.push_back(m);
  }
  Spectrogram s = spectrogram_from_ramsey(times, models, uniform_grid(10e-9, 400), 0.05, seed);
  s.drive_hz = kDrive;
  s.run_label = "synthetic-pinned";
  return s;
}

}  // namespace

void cmd_repro(Context& ctx) {
  const fs::path data = ctx.path("data");
  fs::create_directories(data);

  io::write_transitions_csv(harmonics_dataset(kN5, 10e-6, stream_seed(ctx.seed, "repro/harmonics")),
                            data / "harmonics_measured.csv");
  {
    CircuitParams truth = kN3;
    truth.e_l = 0.015;
    const auto [set, band] = shunt_dataset(truth);
    io::write_transitions_csv(set, data / "shunted_measured.csv");
    io::write_band_csv(band, data / "band.csv");
  }
  io::write_spectrogram_csv(vdc_dataset(stream_seed(ctx.seed, "repro/vdc")), data / "vdc_spectrogram.csv");
  io::write_spectrogram_csv(pinned_dataset(stream_seed(ctx.seed, "repro/pinned")),
                            data / "pinned_spectrogram.csv");

  auto step = [&](const std::string& dir, const std::string& command, const Settings& settings) {
    CommandFn fn = nullptr;
    for (const auto& c : commands())
      if (command == c.name) fn = c.fn;
    Context child;
    child.command = command;
    child.out_dir = ctx.path(dir);
    child.base_dir = ctx.out_dir;
    child.seed = stream_seed(ctx.seed, "repro/" + dir);
    child.threads = ctx.threads;
    child.timings = ctx.timings;
    for (const auto& [k, v] : settings) child.config.set(k, v);
    execute(child, fn);
    for (const auto& [k, v] : child.report.results) ctx.put(dir + "." + k, v);
    for (const auto& w : child.report.warnings) ctx.warn(dir + ": " + w);
  };

  step("dispersion", "dispersion", {{"e_c_ghz", "0.199"}, {"e_j_ghz", "16.5"}});
  step("spectrum-n5", "spectrum", {{"e_c_ghz", format_double(kN5.e_c)}, {"e_j_ghz", join(kN5.e_j)}});
  step("fit-harmonics", "fit-harmonics", {{"measured_csv", "data/harmonics_measured.csv"}, {"order", "5"}});
  step("series-l-n5", "series-l", {{"e_j_ghz", join(kN5.e_j)}});
  step("series-l-n3", "series-l", {{"e_j_ghz", join(kN3.e_j)}});
  step("bound-flux", "bound", {{"e_j_ghz", "16.5"}, {"f01_ghz", "5.125"}, {"shift_ghz", "0.005"}});
  step("el-sweep", "el-sweep",
       {{"measured_csv", "data/shunted_measured.csv"}, {"band_csv", "data/band.csv"}, {"order", "3"}});
  step("ramsey-sim", "ramsey-sim",
       {{"f1_hz", "4e6"}, {"f2_hz", "6e6"}, {"t2_s", "1.4e-6"}, {"tau_step_s", "1e-8"}, {"n_tau", "400"},
        {"noise_sigma", "0.05"}});
  step("ramsey-analyze", "ramsey-analyze",
       {{"trace_csv", "ramsey-sim/ramsey.csv"}, {"drive_hz", "4.2084e9"}, {"delta_f_hz", "2e6"}});
  step("parity-sim-run17", "parity-sim",
       {{"gamma_ps_hz", "8e3"}, {"interval_s", "12e-6"}, {"p_even", "0.51"}, {"n_samples", "1000000"},
        {"jitter", "0.5"}, {"noise_sigma", "0.3"}});
  step("parity-fit-run17", "parity-fit", {{"trace_csv", "parity-sim-run17/telegraph.csv"}, {"max_lag_s", "3.125e-4"}});
  step("parity-sim-drift", "parity-sim",
       {{"gamma_ps_hz", "2.5e3"}, {"interval_s", "3e-6"}, {"p_even", "0.54"}, {"n_samples", "1000000"},
        {"jitter", "0.5"}, {"noise_sigma", "0.3"}});
  step("parity-fit-drift", "parity-fit", {{"trace_csv", "parity-sim-drift/telegraph.csv"}, {"max_lag_s", "1e-3"}});
  step("psd", "psd",
       {{"dt_s", "23"}, {"n_samples", "2817"}, {"target_e2_per_hz", "0.8"}, {"f_ref_hz", "1e-4"}});
  step("vdc-fit", "vdc-fit", {{"spectrogram_csv", "data/vdc_spectrogram.csv"}});
  step("track", "track", {{"spectrogram_csv", "data/pinned_spectrogram.csv"}, {"n_peaks", "2"}});
}

}  // namespace qcharge::cli
