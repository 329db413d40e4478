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

#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "qcharge/error.hpp"
#include "qcharge/model_fit.hpp"
#include "qcharge/noise_psd.hpp"
#include "qcharge/offset_tracker.hpp"
#include "qcharge/ramsey.hpp"
#include "qcharge/rng.hpp"
#include "qcharge/spectral.hpp"
#include "qcharge/telegraph.hpp"
#include "qcharge/units.hpp"

namespace qcharge::cli {

namespace fs = std::filesystem;
using io::format_double;

void Context::put(const std::string& key, double v) { report.results.emplace_back(key, format_double(v)); }

void Context::put(const std::string& key, const std::string& v) { report.results.emplace_back(key, v); }

void Context::put(const std::string& key, const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  report.results.emplace_back(key, s);
}

fs::path Context::input(const std::string& key) const {
  if (!config.has(key)) throw InvalidArgument("missing required key '" + key + "'");
  const fs::path p = config.text(key, "");
  return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

const std::vector<CommandInfo>& commands() {
  static const std::vector<CommandInfo> list = {
      {"spectrum", "transition frequencies of one circuit", cmd_spectrum},
      {"dispersion", "charge dispersion per transition and the n_g sweep", cmd_dispersion},
      {"fit-harmonics", "fit E_C and Josephson harmonics to measured transitions", cmd_fit_harmonics},
      {"el-sweep", "shunted-model fits over a grid of E_L", cmd_el_sweep},
      {"bound", "upper bounds on E_L (flux dispersion and/or sweep band)", cmd_bound},
      {"series-l", "series inductance implied by the second harmonic", cmd_series_l},
      {"ramsey-sim", "simulate a two-frequency Ramsey record", cmd_ramsey_sim},
      {"ramsey-analyze", "FFT and Lorentzian analysis of a Ramsey record", cmd_ramsey_analyze},
      {"parity-sim", "simulate a single-shot parity telegraph record", cmd_parity_sim},
      {"parity-fit", "autocorrelation fit and parity imbalance", cmd_parity_fit},
      {"vdc-fit", "global fit of a V_DC spectroscopy map", cmd_vdc_fit},
      {"track", "follow peaks through a spectrogram", cmd_track},
      {"psd", "noise spectral density of a charge-offset track", cmd_psd},
      {"repro", "run the whole synthetic pipeline", cmd_repro},
  };
  return list;
}

void execute(Context& ctx, CommandFn fn) {
  fs::create_directories(ctx.out_dir);
  ctx.report.schema = io::kSchema;
  ctx.report.command = ctx.command;
  ctx.report.inputs.clear();
  for (const auto& [k, v] : ctx.config.values()) ctx.report.inputs.emplace_back(k, v);
  if (!ctx.config.has("seed")) ctx.report.inputs.emplace_back("seed", std::to_string(ctx.seed));
  const auto t0 = std::chrono::steady_clock::now();
  fn(ctx);
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (ctx.timings) ctx.timings->emplace_back(ctx.command, dt);
  io::write_report(ctx.report, ctx.path(ctx.command + ".report"));
}

CircuitParams circuit_params(const io::RunConfig& cfg) {
  CircuitParams p;
  p.e_c = cfg.number("e_c_ghz");
  p.e_j = cfg.list("e_j_ghz");
  if (cfg.has("e_l_ghz") && cfg.has("l_henry"))
    throw InvalidArgument("give either e_l_ghz or l_henry, not both");
  if (cfg.has("e_l_ghz")) p.e_l = cfg.number("e_l_ghz");
  if (cfg.has("l_henry")) p.e_l = units::inductance_to_el(cfg.number("l_henry"));
  p.n_g = cfg.number("n_g", 0.0);
  p.parity = parse_parity(cfg.text("parity", "even"));
  p.phi_ext = cfg.number("phi_ext", 0.0);
  p.validate();
  return p;
}

SolverConfig solver_config(const io::RunConfig& cfg) {
  SolverConfig s;
  s.charge_cutoff = static_cast<int>(cfg.integer("charge_cutoff", s.charge_cutoff));
  s.osc_dim = static_cast<int>(cfg.integer("osc_dim", s.osc_dim));
  s.conv_tol = cfg.number("conv_tol", s.conv_tol);
  s.n_levels = static_cast<int>(cfg.integer("n_levels", s.n_levels));
  s.validate();
  return s;
}

namespace {

std::string label(int i, int j) { return std::to_string(i) + std::to_string(j); }

FitOptions fit_options(const Context& ctx) {
  FitOptions o;
  o.solver.charge_cutoff = static_cast<int>(ctx.config.integer("charge_cutoff", o.solver.charge_cutoff));
  o.solver.osc_dim = static_cast<int>(ctx.config.integer("osc_dim", o.solver.osc_dim));
  o.solver.conv_tol = ctx.config.number("conv_tol", o.solver.conv_tol);
  o.solver.validate();
  o.threads = ctx.threads;
  return o;
}

void put_l(Context& ctx, const std::string& prefix, double e_l) {
  ctx.put(prefix + "_ghz", e_l);
  ctx.put(prefix == "e_l" ? "l_henry" : prefix + "_l_henry",
          e_l > 0.0 ? units::el_to_inductance(e_l) : std::numeric_limits<double>::infinity());
}

std::vector<double> el_grid(const io::RunConfig& cfg) {
  if (cfg.has("e_l_grid_ghz")) return cfg.list("e_l_grid_ghz");
  if (cfg.has("e_l_min_ghz") || cfg.has("e_l_max_ghz") || cfg.has("e_l_points")) {
    const double lo = cfg.number("e_l_min_ghz", 1e-3), hi = cfg.number("e_l_max_ghz", 2.0);
    const int n = static_cast<int>(cfg.integer("e_l_points", 60));
    if (!(lo > 0.0 && hi > lo && n >= 2)) throw InvalidArgument("E_L grid needs 0 < min < max and >= 2 points");
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = lo * std::pow(hi / lo, i / (n - 1.0));
    return g;
  }
  return default_el_grid();
}

// Writes the sweep table and, when a band is given, the bound.
void sweep_and_bound(Context& ctx, const TransitionSet& measured, const FrequencyBand* band) {
  const int order = static_cast<int>(ctx.config.integer("order", 3));
  const ElSweepResult sweep = el_sweep(measured, el_grid(ctx.config), order, fit_options(ctx));

  std::vector<std::string> header = {"e_l_ghz", "l_henry", "ok", "rms_mhz", "e_c_ghz"};
  for (int k = 1; k <= order; ++k) header.push_back("e_j" + std::to_string(k) + "_ghz");
  std::size_t n_removed = 0;
  for (const auto& p : sweep.points)
    if (p.ok) n_removed = std::max(n_removed, p.removed.entries.size());
  for (std::size_t i = 0; i < n_removed; ++i) header.push_back("removed_f" + label(i, i + 1) + "_ghz");
  std::vector<std::vector<double>> cols(header.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  int failed = 0;
  for (const auto& p : sweep.points) {
    std::size_t c = 0;
    cols[c++].push_back(p.e_l);
    cols[c++].push_back(p.e_l > 0.0 ? units::el_to_inductance(p.e_l) : std::numeric_limits<double>::infinity());
    cols[c++].push_back(p.ok ? 1.0 : 0.0);
    cols[c++].push_back(p.ok ? p.fit.rms_mhz : nan);
    cols[c++].push_back(p.ok ? p.fit.params.e_c : nan);
    for (int k = 0; k < order; ++k) cols[c++].push_back(p.ok ? p.fit.params.e_j[k] : nan);
    for (std::size_t i = 0; i < n_removed; ++i)
      cols[c++].push_back(p.ok && i < p.removed.entries.size() ? p.removed.entries[i].freq_ghz : nan);
    if (!p.ok) {
      ++failed;
      ctx.warn("fit failed at e_l = " + format_double(p.e_l) + " GHz: " + p.failure);
    } else if (!p.fit.converged) {
      ctx.warn("fit not converged at e_l = " + format_double(p.e_l) + " GHz");
    }
  }
  io::emit_plot_data(ctx.path("el_sweep.csv"), header, cols);
  ctx.put("sweep.order", order);
  ctx.put("sweep.points", static_cast<int>(sweep.points.size()));
  ctx.put("sweep.failed", failed);
  double best = std::numeric_limits<double>::infinity(), best_el = nan;
  for (const auto& p : sweep.points)
    if (p.ok && p.fit.rms_mhz < best) best = p.fit.rms_mhz, best_el = p.e_l;
  ctx.put("sweep.best_rms_mhz", best);
  ctx.put("sweep.best_e_l_ghz", best_el);

  if (band) {
    const InductanceBound b = inductance_bound(sweep, *band);
    ctx.put("bound.e_l_max_ghz", b.e_l_max);
    ctx.put("bound.l_min_henry", b.l_min_henry);
    ctx.put("bound.unbounded_below_grid", b.unbounded_below_grid);
    if (b.unbounded_below_grid) ctx.warn("no grid point satisfies the band; bound is the grid minimum");
  }
}

double lorentzian_power(const PeakFit& fit, double f) {
  double p = fit.baseline;
  for (const auto& pk : fit.peaks) {
    const double u = (f - pk.center_hz) / pk.half_width_hz;
    p += pk.amplitude / (1.0 + u * u);
  }
  return p;
}

}  // namespace

// ---------------------------------------------------------------- circuit

void cmd_spectrum(Context& ctx) {
  const CircuitParams p = circuit_params(ctx.config);
  const SolverConfig s = solver_config(ctx.config);
  const TransitionSet t = transition_frequencies(p, s);
  io::write_transitions_csv(t, ctx.path("transitions.csv"));
  ctx.put("model", p.e_l > 0.0 ? std::string("Hfull") : "H" + std::to_string(p.harmonic_order()));
  if (p.e_l > 0.0) put_l(ctx, "e_l", p.e_l);
  for (const auto& e : t.entries) ctx.put("f" + label(e.lower, e.upper) + "_ghz", e.freq_ghz);
  for (std::size_t i = 0; i < t.notes.size(); ++i) ctx.put("note." + std::to_string(i), t.notes[i]);
}

void cmd_dispersion(Context& ctx) {
  const CircuitParams p = circuit_params(ctx.config);
  if (p.e_l > 0.0) throw InvalidArgument("dispersion is defined for the unshunted model (e_l = 0)");
  const SolverConfig s = solver_config(ctx.config);
  const int n = s.n_levels - 1;

  std::vector<double> lower, disp;
  bool ordered = true;
  for (int i = 0; i < n; ++i) {
    lower.push_back(i);
    disp.push_back(charge_dispersion(p, s, i));
    ctx.put("delta_f" + label(i, i + 1) + "_ghz", disp.back());
    if (i > 0 && !(disp[i] > disp[i - 1])) ordered = false;
  }
  ctx.put("increasing_with_level", ordered);
  io::emit_plot_data(ctx.path("dispersion.csv"), {"lower", "delta_f_ghz"}, {lower, disp});

  // f_{i,i+1}(n_g) for both parities over one period.
  constexpr int kSteps = 100;
  std::vector<std::string> header = {"n_g"};
  std::vector<std::vector<double>> cols(1 + 2 * n);
  for (int i = 0; i < n; ++i) {
    header.push_back("f" + label(i, i + 1) + "_even_ghz");
    header.push_back("f" + label(i, i + 1) + "_odd_ghz");
  }
  for (int k = 0; k <= kSteps; ++k) {
    CircuitParams q = p;
    q.n_g = static_cast<double>(k) / kSteps;
    cols[0].push_back(q.n_g);
    q.parity = Parity::even;
    const TransitionSet even = transition_frequencies(q, s);
    q.parity = Parity::odd;
    const TransitionSet odd = transition_frequencies(q, s);
    for (int i = 0; i < n; ++i) {
      cols[1 + 2 * i].push_back(even.entries[i].freq_ghz);
      cols[2 + 2 * i].push_back(odd.entries[i].freq_ghz);
    }
  }
  io::emit_plot_data(ctx.path("dispersion_sweep.csv"), header, cols);
}

void cmd_fit_harmonics(Context& ctx) {
  const TransitionSet measured = io::load_transitions_csv(ctx.input("measured_csv"));
  const int order = static_cast<int>(ctx.config.integer("order", 3));
  const FitReport fit = fit_harmonics_staged(measured, order, fit_options(ctx));
  io::append_fit_report(ctx.report.results, "fit", fit);
  if (!fit.converged) ctx.warn("fit did not converge");
  if (order >= 2) {
    const auto ls = units::series_inductance(fit.params.e_j[1], fit.params.e_j[0]);
    ctx.put("series_l_henry", ls.magnitude_henry);
  }
  std::vector<double> idx, f, r;
  for (std::size_t i = 0; i < measured.entries.size(); ++i) {
    idx.push_back(static_cast<double>(i));
    f.push_back(measured.entries[i].freq_ghz);
    r.push_back(fit.residuals_mhz[i]);
  }
  io::emit_plot_data(ctx.path("residuals.csv"), {"index", "measured_ghz", "residual_mhz"}, {idx, f, r});
}

void cmd_el_sweep(Context& ctx) {
  const TransitionSet measured = io::load_transitions_csv(ctx.input("measured_csv"));
  if (ctx.config.has("band_csv")) {
    const FrequencyBand band = io::load_band_csv(ctx.input("band_csv"));
    sweep_and_bound(ctx, measured, &band);
  } else {
    sweep_and_bound(ctx, measured, nullptr);
  }
}

void cmd_bound(Context& ctx) {
  const auto& cfg = ctx.config;
  bool any = false;
  if (cfg.has("f01_ghz") || cfg.has("shift_ghz")) {
    const double e_j = cfg.list("e_j_ghz").front();
    const double b = flux_dispersion_bound(e_j, cfg.number("f01_ghz"), cfg.number("shift_ghz"));
    put_l(ctx, "flux.e_l_max", b);
    any = true;
  }
  if (cfg.has("band_csv")) {
    const TransitionSet measured = io::load_transitions_csv(ctx.input("measured_csv"));
    const FrequencyBand band = io::load_band_csv(ctx.input("band_csv"));
    sweep_and_bound(ctx, measured, &band);
    any = true;
  }
  if (!any) throw InvalidArgument("bound needs f01_ghz and shift_ghz, or band_csv and measured_csv");
}

void cmd_series_l(Context& ctx) {
  const std::vector<double> e_j = ctx.config.list("e_j_ghz");
  double e_j2 = 0.0;
  if (ctx.config.has("e_j2_ghz")) e_j2 = ctx.config.number("e_j2_ghz");
  else if (e_j.size() >= 2) e_j2 = e_j[1];
  else throw InvalidArgument("series-l needs a second harmonic (e_j_ghz with two entries or e_j2_ghz)");
  const auto ls = units::series_inductance(e_j2, e_j[0]);
  ctx.put("l_s_henry", ls.magnitude_henry);
  ctx.put("l_s_ph", ls.magnitude_henry * 1e12);
  ctx.put("negative_harmonic", ls.negative_harmonic);
}

// ---------------------------------------------------------------- Ramsey

void cmd_ramsey_sim(Context& ctx) {
  const auto& cfg = ctx.config;
  RamseyModel m;
  m.f1_hz = cfg.number("f1_hz");
  m.f2_hz = cfg.number("f2_hz");
  m.t2_s = cfg.number("t2_s");
  m.w1 = cfg.number("w1", 1.0);
  m.w2 = cfg.number("w2", 1.0);
  const double step = cfg.number("tau_step_s", 10e-9);
  const int n = static_cast<int>(cfg.integer("n_tau", 400));
  const RamseyTrace tr =
      synth_ramsey(m, uniform_grid(step, n), cfg.number("noise_sigma", 0.0), stream_seed(ctx.seed, "ramsey-sim"));
  io::write_ramsey_csv(tr, ctx.path("ramsey.csv"));
  ctx.put("samples", n);
  ctx.put("span_s", tr.span());
  ctx.put("bin_hz", 1.0 / tr.span());
}

void cmd_ramsey_analyze(Context& ctx) {
  const auto& cfg = ctx.config;
  const RamseyTrace tr = io::load_ramsey_csv(ctx.input("trace_csv"));
  const int pad = static_cast<int>(cfg.integer("pad_factor", 8));
  const SpectrumEstimate spec = fft_magnitude(tr, pad);
  const double bin = 1.0 / tr.span();
  ctx.put("bin_hz", bin);

  PeakFit fit = fit_lorentzian_peaks(spec, 2);
  bool single = fit.overlapping;
  if (single) {
    ctx.warn("peaks closer than one bin; a single Lorentzian was fitted");
    fit = fit_lorentzian_peaks(spec, 1);
  }
  if (!fit.converged) ctx.warn("Lorentzian fit did not converge");
  for (std::size_t k = 0; k < fit.peaks.size(); ++k) {
    const std::string p = "peak" + std::to_string(k + 1);
    ctx.put(p + ".center_hz", fit.peaks[k].center_hz);
    ctx.put(p + ".half_width_hz", fit.peaks[k].half_width_hz);
    ctx.put(p + ".amplitude", fit.peaks[k].amplitude);
  }
  double mean = 0.0;
  for (const auto& pk : fit.peaks) mean += pk.center_hz / fit.peaks.size();
  ctx.put("delta_f_mean_hz", mean);
  if (cfg.has("drive_hz")) ctx.put("transition_mean_hz", cfg.number("drive_hz") - mean);

  if (!single && cfg.has("delta_f_hz")) {
    // Parity labels are unknown: the splitting magnitude is used, so n_g is
    // folded into [0, 1/4].
    const double split = fit.peaks[1].center_hz - fit.peaks[0].center_hz;
    const int level = static_cast<int>(cfg.integer("level", 3));
    const double sign = (level % 2 == 1) ? 1.0 : -1.0;
    const double sigma = std::max(fit.peaks[0].half_width_hz, fit.peaks[1].half_width_hz) / std::sqrt(tr.tau_s.size());
    const ChargeOffsetEstimate est = splitting_to_ng(0.0, sign * split, cfg.number("delta_f_hz"), sigma, level);
    ctx.put("n_g", est.n_g);
    ctx.put("n_g_uncertainty", est.uncertainty);
    ctx.put("n_g_clamped", est.clamped);
    ctx.warn("parity branches unlabelled; n_g reported in [0, 1/4]");
  }

  try {
    const RamseyFit td = time_domain_fit(tr);
    ctx.put("time_fit.f1_hz", td.model.f1_hz);
    ctx.put("time_fit.f2_hz", td.model.f2_hz);
    ctx.put("time_fit.t2_s", td.model.t2_s);
    ctx.put("time_fit.single_frequency", td.single_frequency);
    ctx.put("time_fit.converged", td.converged);
  } catch (const Error& e) {
    ctx.warn(std::string("time-domain fit skipped: ") + e.what());
  }

  std::vector<double> power, model;
  for (std::size_t i = 0; i < spec.freq_hz.size(); ++i) {
    power.push_back(spec.magnitude[i] * spec.magnitude[i]);
    model.push_back(lorentzian_power(fit, spec.freq_hz[i]));
  }
  io::emit_plot_data(ctx.path("spectrum.csv"), {"freq_hz", "magnitude", "power", "power_fit"},
                     {spec.freq_hz, spec.magnitude, power, model});
}

// ---------------------------------------------------------------- parity

void cmd_parity_sim(Context& ctx) {
  const auto& cfg = ctx.config;
  TelegraphParams tp;
  tp.gamma_ps_hz = cfg.number("gamma_ps_hz");
  tp.p_even = cfg.number("p_even", tp.p_even);
  tp.i_even = cfg.number("i_even", tp.i_even);
  tp.i_odd = cfg.number("i_odd", tp.i_odd);
  tp.mean_interval_s = cfg.number("interval_s", tp.mean_interval_s);
  tp.n_samples = static_cast<int>(cfg.integer("n_samples", tp.n_samples));
  tp.jitter = cfg.number("jitter", tp.jitter);
  tp.noise_sigma = cfg.number("noise_sigma", tp.noise_sigma);
  const TelegraphSimulation sim = simulate_telegraph(tp, stream_seed(ctx.seed, "parity-sim"));
  io::write_telegraph_csv(sim.trace, ctx.path("telegraph.csv"));
  ctx.put("samples", tp.n_samples);
  ctx.put("realized_even_fraction", 1.0 - sim.realized_odd_fraction);
  ctx.put("realized_odd_fraction", sim.realized_odd_fraction);
}

void cmd_parity_fit(Context& ctx) {
  const auto& cfg = ctx.config;
  const TelegraphTrace tr = io::load_telegraph_csv(ctx.input("trace_csv"));
  const double max_lag = cfg.number("max_lag_s", 300.0 * tr.mean_interval());
  const Autocorrelation ac = autocorrelation(tr, max_lag);
  for (const auto& w : ac.warnings) ctx.warn(w);
  const AutocorrFit fit = fit_stretched_exponential(ac);
  ctx.put("gamma_ps_hz", fit.gamma_ps_hz);
  ctx.put("gamma_sigma_hz", fit.gamma_sigma_hz);
  ctx.put("beta", fit.beta);
  ctx.put("beta_sigma", fit.beta_sigma);
  ctx.put("amplitude", fit.amplitude);
  ctx.put("offset", fit.offset);
  ctx.put("markov_gamma_hz", fit.markov_gamma_hz);
  ctx.put("converged", fit.converged);
  if (!fit.converged) ctx.warn("autocorrelation fit did not converge");

  const Imbalance imb = estimate_imbalance(tr, cfg.number("i_even", 1.0), cfg.number("i_odd", -1.0));
  ctx.put("imbalance.p_even", imb.p_even);
  ctx.put("imbalance.p_odd", imb.p_odd);
  ctx.put("imbalance.uncertainty", imb.uncertainty);
  ctx.put("imbalance.threshold", imb.threshold);
  ctx.put("imbalance.misclassification", imb.misclassification);

  std::vector<double> stretched, markov, counts;
  for (std::size_t i = 0; i < ac.lag_s.size(); ++i) {
    const double x = 2.0 * ac.lag_s[i];
    stretched.push_back(fit.amplitude * std::exp(-std::pow(x * fit.gamma_ps_hz, fit.beta)) + fit.offset);
    markov.push_back(fit.amplitude * std::exp(-x * fit.markov_gamma_hz) + fit.offset);
    counts.push_back(static_cast<double>(ac.counts[i]));
  }
  io::emit_plot_data(ctx.path("autocorrelation.csv"),
                     {"lag_s", "c", "std_error", "count", "stretched_fit", "markov_fit"},
                     {ac.lag_s, ac.c, ac.std_error, counts, stretched, markov});
}

// ---------------------------------------------------------------- offset tracking

void cmd_vdc_fit(Context& ctx) {
  const Spectrogram spec = io::load_spectrogram_csv(ctx.input("spectrogram_csv"));
  const std::vector<VdcPoint> pts = extract_vdc_points(spec, ctx.threads);
  const std::size_t skipped = spec.rows.size() - pts.size();
  if (skipped) ctx.warn(std::to_string(skipped) + " rows without two separable peaks were skipped");
  const VdcFit fit = global_vdc_fit(pts);
  ctx.put("f_mean_hz", fit.f_mean_hz);
  ctx.put("f_mean_sigma_hz", fit.f_mean_sigma);
  ctx.put("delta_f_hz", fit.delta_f_hz);
  ctx.put("delta_f_sigma_hz", fit.delta_f_sigma);
  ctx.put("v_period_v", fit.v_period_v);
  ctx.put("v_period_sigma_v", fit.v_period_sigma);
  ctx.put("rms_hz", fit.rms_hz);
  ctx.put("rejected_points", fit.rejected_points);
  if (fit.rejected_points > 0) ctx.warn(std::to_string(fit.rejected_points) + " V_DC points rejected as outliers");
  ctx.put("converged", fit.converged);
  ctx.put("blocks", static_cast<int>(fit.track.t_s.size()));
  int jumps = 0;
  for (auto j : fit.track.jump) jumps += j;
  ctx.put("jumps", jumps);
  ctx.warn("n_g0 is determined modulo 1/2 without parity labels");
  io::write_charge_track_csv(fit.track, ctx.path("charge_track.csv"));

  const ChargeTrack naive = splitting_only_track(pts, fit.delta_f_hz);
  io::write_charge_track_csv(naive, ctx.path("splitting_only_track.csv"));

  std::vector<double> t, v, hi, lo;
  for (const auto& p : pts) {
    t.push_back(p.t_s);
    v.push_back(p.vdc_v);
    hi.push_back(p.f_hi_hz);
    lo.push_back(p.f_lo_hz);
  }
  io::emit_plot_data(ctx.path("vdc_points.csv"), {"t_s", "vdc_v", "f_hi_hz", "f_lo_hz"}, {t, v, hi, lo});
}

void cmd_track(Context& ctx) {
  const Spectrogram spec = io::load_spectrogram_csv(ctx.input("spectrogram_csv"));
  const int n_peaks = static_cast<int>(ctx.config.integer("n_peaks", 2));
  TrackOptions opt;
  opt.threads = ctx.threads;
  const TrackResult res = track_peaks(spec, n_peaks, opt);
  ctx.put("rows", static_cast<int>(spec.rows.size()));
  ctx.put("gap_rows", res.gap_rows);
  int shown = 0;
  for (std::size_t r = 0; r < res.rows.size() && shown < 20; ++r)
    if (res.rows[r].gap) {
      ctx.warn("row " + std::to_string(r) + ": " + res.rows[r].diagnostic);
      ++shown;
    }
  std::vector<std::string> header = {"t_s"};
  std::vector<std::vector<double>> cols = {spec.times_s};
  for (std::size_t k = 0; k < res.tracks.size(); ++k) {
    header.push_back("track" + std::to_string(k + 1) + "_hz");
    std::vector<double> f;
    for (double g : res.tracks[k]) f.push_back(std::isnan(g) ? g : absolute_frequency(spec, g));
    cols.push_back(std::move(f));
  }
  io::emit_plot_data(ctx.path("tracks.csv"), header, cols);
}

void cmd_psd(Context& ctx) {
  const auto& cfg = ctx.config;
  ChargeTrack track;
  if (cfg.has("track_csv")) {
    track = io::load_charge_track_csv(ctx.input("track_csv"));
  } else {
    const double dt = cfg.number("dt_s");
    const int n = static_cast<int>(cfg.integer("n_samples", 0));
    double sigma = 0.0;
    if (cfg.has("step_sigma")) {
      sigma = cfg.number("step_sigma");
    } else {
      sigma = calibrate_step_sigma(cfg.number("target_e2_per_hz"), cfg.number("f_ref_hz", 1e-4), dt);
    }
    ctx.put("simulated.step_sigma", sigma);
    track = simulate_charge_drift(sigma, dt, n, stream_seed(ctx.seed, "psd/drift"));
    io::write_charge_track_csv(track, ctx.path("charge_track.csv"));
  }
  PsdOptions opt;
  opt.segments = static_cast<int>(cfg.integer("segments", opt.segments));
  const PsdEstimate est = psd(track, opt);
  if (est.resampled) ctx.warn("non-uniform sampling: the track was resampled");
  ctx.put("psd.units", est.units);
  ctx.put("psd.detrend", est.detrend);
  ctx.put("psd.window", est.window);
  ctx.put("psd.segment_length", est.segment_length);
  ctx.put("psd.segments_used", est.segments_used);
  ctx.put("psd.record_f_min_hz", est.record_f_min_hz);
  ctx.put("psd.record_f_max_hz", est.record_f_max_hz);

  const double f_ref = cfg.number("f_ref_hz", 1e-4);
  const auto range = default_fit_range(est);
  const double f_lo = cfg.number("fit_lo_hz", range.first);
  const double f_hi = cfg.number("fit_hi_hz", range.second);
  const PowerLawFit fit = fit_power_law(est, f_ref, f_lo, f_hi);
  ctx.put("fit.alpha", fit.alpha);
  ctx.put("fit.alpha_sigma", fit.alpha_sigma);
  ctx.put("fit.f_ref_hz", fit.f_ref_hz);
  ctx.put("fit.amplitude_e2_per_hz", fit.amplitude);
  ctx.put("fit.amplitude_inverse_square_e2_per_hz", fit.amplitude_inverse_square);
  ctx.put("fit.f_lo_hz", fit.f_lo_hz);
  ctx.put("fit.f_hi_hz", fit.f_hi_hz);
  ctx.put("fit.points", fit.n_points);
  if (fit.not_inverse_square) ctx.warn("fitted exponent is far from -2");

  std::vector<std::string> header = {"freq_hz", "density_e2_per_hz", "power_law_fit", "inverse_square_fit"};
  std::vector<std::vector<double>> cols = {est.freq_hz, est.density,
                                           power_law_line(fit.amplitude, fit.alpha, f_ref, est.freq_hz),
                                           power_law_line(fit.amplitude_inverse_square, -2.0, f_ref, est.freq_hz)};
  for (const char* key : {"reference_a_e2_per_hz", "reference_b_e2_per_hz"}) {
    if (!cfg.has(key)) continue;
    header.push_back(std::string(key).substr(0, 11) + "_line");
    cols.push_back(power_law_line(cfg.number(key), -2.0, f_ref, est.freq_hz));
  }
  io::emit_plot_data(ctx.path("psd.csv"), header, cols);
}

}  // namespace qcharge::cli
