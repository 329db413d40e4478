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

#include "qcharge/offset_tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "qcharge/error.hpp"
#include "qcharge/optimize.hpp"
#include "qcharge/parallel.hpp"
#include "qcharge/rng.hpp"

namespace qcharge {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double median_power(const SpectrumEstimate& s) {
  std::vector<double> p(s.magnitude.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = s.magnitude[i] * s.magnitude[i];
  const std::size_t mid = p.size() / 2;
  std::nth_element(p.begin(), p.begin() + mid, p.end());
  return p[mid];
}

// Reduces n modulo 1/2 into [-1/4, 1/4).
double canonical_branch(double n) { return n - 0.5 * std::floor((n + 0.25) / 0.5); }

}  // namespace

void Spectrogram::validate() const {
  if (rows.size() != times_s.size()) throw InvalidArgument("spectrogram rows and times differ");
  if (!vdc_v.empty() && vdc_v.size() != rows.size())
    throw InvalidArgument("spectrogram V_DC column does not match rows");
  if (freq_hz.size() < 4) throw InvalidArgument("spectrogram frequency grid too short");
  for (std::size_t i = 1; i < freq_hz.size(); ++i)
    if (!(freq_hz[i] > freq_hz[i - 1])) throw InvalidArgument("frequency grid must increase");
  for (const auto& r : rows)
    if (r.size() != freq_hz.size()) throw InvalidArgument("spectrogram row length mismatch");
  for (std::size_t i = 1; i < times_s.size(); ++i)
    if (times_s[i] < times_s[i - 1]) throw InvalidArgument("spectrogram times must not decrease");
}

SpectrumEstimate Spectrogram::row_spectrum(std::size_t row) const {
  SpectrumEstimate s;
  s.freq_hz = freq_hz;
  s.magnitude = rows.at(row);
  s.n_fft = 2 * (static_cast<int>(freq_hz.size()) - 1);
  return s;
}

double absolute_frequency(const Spectrogram& spec, double grid_hz) {
  return spec.drive_hz > 0.0 ? spec.drive_hz - grid_hz : grid_hz;
}

Spectrogram spectrogram_from_ramsey(const std::vector<double>& times_s,
                                    const std::vector<RamseyModel>& models,
                                    const std::vector<double>& tau, double noise_sigma,
                                    std::uint64_t seed, int pad_factor) {
  if (times_s.size() != models.size()) throw InvalidArgument("one model per row required");
  if (times_s.empty()) throw InvalidArgument("empty spectrogram");
  Spectrogram out;
  out.times_s = times_s;
  out.rows.resize(times_s.size());
  const double dt = RamseyTrace{tau, std::vector<double>(tau.size(), 0.0), 1}.uniform_step();
  parallel_for(times_s.size(), [&](std::size_t r) {
    const std::uint64_t s = stream_seed(seed, "row/" + std::to_string(r));
    std::vector<double> values;
    if (models[r].t2_s > 0.0) {
      values = synth_ramsey(models[r], tau, noise_sigma, s).i_quadrature;
    } else {
      std::mt19937_64 rng(s);
      std::normal_distribution<double> g(0.0, noise_sigma);
      values.resize(tau.size());
      for (auto& v : values) v = g(rng);
    }
    out.rows[r] = fft_magnitude(values, dt, pad_factor, true).magnitude;
  });
  out.freq_hz = fft_magnitude(std::vector<double>(tau.size(), 0.0), dt, pad_factor, true).freq_hz;
  return out;
}

TrackResult track_peaks(const Spectrogram& spec, int n_peaks, const TrackOptions& options) {
  spec.validate();
  if (n_peaks < 1) throw InvalidArgument("n_peaks must be >= 1");
  const std::size_t n_rows = spec.rows.size();
  TrackResult out;
  out.rows.resize(n_rows);
  parallel_for(
      n_rows,
      [&](std::size_t r) {
        RowTrack& row = out.rows[r];
        const SpectrumEstimate s = spec.row_spectrum(r);
        try {
          row.fit = fit_lorentzian_peaks(s, n_peaks);
        } catch (const Error& e) {
          row.gap = true;
          row.diagnostic = std::string("fit failed: ") + e.what();
          return;
        }
        const double floor = std::max(median_power(s), std::numeric_limits<double>::min());
        std::ostringstream os;
        if (!row.fit.converged) os << "fit not converged; ";
        for (const auto& p : row.fit.peaks)
          if (!(p.amplitude > options.min_contrast * floor)) {
            os << "peak at " << p.center_hz << " Hz below contrast threshold; ";
            break;
          }
        if (row.fit.overlapping) os << "peaks closer than one bin; ";
        row.diagnostic = os.str();
        row.gap = !row.diagnostic.empty();
      },
      options.threads);

  out.tracks.assign(n_peaks, std::vector<double>(n_rows, kNan));
  std::vector<double> prev;
  std::vector<int> perm(n_peaks);
  for (std::size_t r = 0; r < n_rows; ++r) {
    if (out.rows[r].gap) {
      ++out.gap_rows;
      continue;
    }
    std::vector<double> cur;
    for (const auto& p : out.rows[r].fit.peaks) cur.push_back(p.center_hz);
    std::iota(perm.begin(), perm.end(), 0);
    if (!prev.empty()) {
      std::vector<int> best = perm;
      double best_cost = std::numeric_limits<double>::infinity();
      do {
        double c = 0.0;
        for (int k = 0; k < n_peaks; ++k) c += std::abs(cur[perm[k]] - prev[k]);
        if (c < best_cost) best_cost = c, best = perm;
      } while (std::next_permutation(perm.begin(), perm.end()));
      perm = best;
    }
    prev.assign(n_peaks, 0.0);
    for (int k = 0; k < n_peaks; ++k) {
      out.tracks[k][r] = cur[perm[k]];
      prev[k] = cur[perm[k]];
    }
  }
  return out;
}

void ChargeTrack::validate() const {
  if (ng.size() != t_s.size() || ng_err.size() != t_s.size())
    throw InvalidArgument("charge track columns differ in length");
  if (!jump.empty() && jump.size() != t_s.size()) throw InvalidArgument("jump flags length mismatch");
  for (std::size_t i = 0; i < t_s.size(); ++i) {
    if (i > 0 && !(t_s[i] > t_s[i - 1])) throw InvalidArgument("charge track times must increase");
    if (std::isinf(ng[i])) throw InvalidArgument("n_g0 must be finite");
    if (!std::isnan(ng[i]) && !(ng_err[i] > 0.0)) throw InvalidArgument("n_g0 uncertainty must be > 0");
  }
}

std::vector<VdcPoint> extract_vdc_points(const Spectrogram& spec, unsigned threads) {
  spec.validate();
  if (spec.vdc_v.empty()) throw InvalidArgument("spectrogram has no V_DC column");
  const std::size_t n = spec.rows.size();
  std::vector<VdcPoint> pts(n);
  std::vector<std::uint8_t> ok(n, 0);
  parallel_for(
      n,
      [&](std::size_t r) {
        const SpectrumEstimate s = spec.row_spectrum(r);
        PeakFit fit;
        try {
          fit = fit_lorentzian_peaks(s, 2);
          if (!fit.converged || fit.overlapping) return;
          fit = fit_coherent_peaks(s, fit);
        } catch (const Error&) {
          return;
        }
        if (!fit.converged || fit.overlapping) return;
        const auto& a = fit.peaks[0];
        const auto& b = fit.peaks[1];
        const double sep = b.center_hz - a.center_hz;
        if (sep < 2.0 * std::max(a.half_width_hz, b.half_width_hz)) return;
        const double fa = absolute_frequency(spec, a.center_hz);
        const double fb = absolute_frequency(spec, b.center_hz);
        pts[r] = {spec.times_s[r], spec.vdc_v[r], std::max(fa, fb), std::min(fa, fb)};
        ok[r] = 1;
      },
      threads);
  std::vector<VdcPoint> out;
  for (std::size_t r = 0; r < n; ++r)
    if (ok[r]) out.push_back(pts[r]);
  return out;
}

VdcFit global_vdc_fit(const Spectrogram& spec, unsigned threads) {
  return global_vdc_fit(extract_vdc_points(spec, threads));
}

static VdcFit fit_vdc_once(const std::vector<VdcPoint>& points) {
  if (points.empty()) throw InvalidArgument("no V_DC points");
  std::map<double, std::vector<int>> by_time;
  for (std::size_t i = 0; i < points.size(); ++i) by_time[points[i].t_s].push_back(static_cast<int>(i));
  std::vector<std::vector<int>> blocks;
  std::vector<double> block_t;
  for (auto& [t, idx] : by_time) {
    std::vector<double> v;
    for (int i : idx) v.push_back(points[i].vdc_v);
    std::sort(v.begin(), v.end());
    const auto distinct = std::unique(v.begin(), v.end()) - v.begin();
    if (distinct < 5) {
      std::ostringstream os;
      os << "under-sampled V_DC sweep at t = " << t << " s (" << distinct << " distinct values)";
      throw InvalidArgument(os.str());
    }
    blocks.push_back(idx);
    block_t.push_back(t);
  }
  const int n_blocks = static_cast<int>(blocks.size());

  double f_mean0 = 0.0, df0 = 0.0, v_span = 0.0, v_step = std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    f_mean0 += 0.5 * (p.f_hi_hz + p.f_lo_hz);
    df0 = std::max(df0, p.f_hi_hz - p.f_lo_hz);
  }
  f_mean0 /= points.size();
  for (const auto& idx : blocks) {
    std::vector<double> v;
    for (int i : idx) v.push_back(points[i].vdc_v);
    std::sort(v.begin(), v.end());
    v_span = std::max(v_span, v.back() - v.front());
    for (std::size_t k = 1; k < v.size(); ++k)
      if (v[k] > v[k - 1]) v_step = std::min(v_step, v[k] - v[k - 1]);
  }
  if (!(df0 > 0.0)) throw InvalidArgument("no parity splitting in the V_DC data");

  auto half_split = [](double df, double n, double v, double vp) {
    return 0.5 * df * std::abs(std::cos(kTwoPi * (n + v / vp)));
  };
  auto block_cost = [&](const std::vector<int>& idx, double n, double vp) {
    double c = 0.0;
    for (int i : idx) {
      const auto& p = points[i];
      const double h = half_split(df0, n, p.vdc_v, vp);
      const double a = p.f_hi_hz - (f_mean0 + h), b = p.f_lo_hz - (f_mean0 - h);
      c += a * a + b * b;
    }
    return c;
  };
  constexpr int kPhaseSteps = 64;
  auto best_phase = [&](const std::vector<int>& idx, double vp, double& cost) {
    double best_n = 0.0;
    cost = std::numeric_limits<double>::infinity();
    for (int s = 0; s < kPhaseSteps; ++s) {
      const double n = -0.25 + 0.5 * s / kPhaseSteps;
      const double c = block_cost(idx, n, vp);
      if (c < cost) cost = c, best_n = n;
    }
    return best_n;
  };

  // V_period scan: |cos| repeats every V_period / 2, so the scan starts at
  // four sample steps and stops at twice the widest sweep.
  const double vp_lo = 4.0 * v_step, vp_hi = 2.0 * v_span;
  if (!(vp_hi > vp_lo)) throw InvalidArgument("V_DC sweep too narrow for a period scan");
  double vp0 = vp_lo, best_total = std::numeric_limits<double>::infinity();
  constexpr int kPeriodSteps = 400;
  for (int s = 0; s < kPeriodSteps; ++s) {
    const double vp = vp_lo * std::pow(vp_hi / vp_lo, s / (kPeriodSteps - 1.0));
    double total = 0.0, c = 0.0;
    for (const auto& idx : blocks) {
      best_phase(idx, vp, c);
      total += c;
    }
    if (total < best_total) best_total = total, vp0 = vp;
  }

  Eigen::VectorXd x0(3 + n_blocks), scale(3 + n_blocks);
  x0(0) = f_mean0, x0(1) = df0, x0(2) = vp0;
  scale(0) = df0, scale(1) = df0, scale(2) = 0.01 * vp0;
  for (int b = 0; b < n_blocks; ++b) {
    double c = 0.0;
    x0(3 + b) = best_phase(blocks[b], vp0, c);
    scale(3 + b) = 0.01;
  }
  const int m = 2 * static_cast<int>(points.size());
  std::vector<int> block_of(points.size());
  for (int b = 0; b < n_blocks; ++b)
    for (int i : blocks[b]) block_of[i] = b;
  ResidualFn f = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd r(m);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& p = points[i];
      const double h = half_split(x(1), x(3 + block_of[i]), p.vdc_v, x(2));
      r(2 * i) = (x(0) + h - p.f_hi_hz) / df0;
      r(2 * i + 1) = (x(0) - h - p.f_lo_hz) / df0;
    }
    return r;
  };
  OptimizeOptions opts;
  opts.max_simplex_iterations = 0;
  opts.scale = scale;
  const OptimizeResult res = least_squares(f, x0, opts);

  VdcFit out;
  out.converged = res.converged;
  out.f_mean_hz = res.x(0);
  out.delta_f_hz = std::abs(res.x(1));
  double vp = res.x(2);
  const double n_sign = vp < 0.0 ? -1.0 : 1.0;  // |cos| is even: (n, V_p) ~ (-n, -V_p)
  out.v_period_v = std::abs(vp);
  out.f_mean_sigma = res.sigma(0);
  out.delta_f_sigma = res.sigma(1);
  out.v_period_sigma = res.sigma(2);
  out.rms_hz = std::sqrt(res.cost / m) * df0;

  ChargeTrack& tr = out.track;
  double prev = 0.0;
  for (int b = 0; b < n_blocks; ++b) {
    double n = canonical_branch(n_sign * res.x(3 + b));
    std::uint8_t jump = 0;
    if (b > 0) {
      n += 0.5 * std::round((prev - n) / 0.5);
      jump = std::abs(n - prev) > 0.125;
    }
    tr.t_s.push_back(block_t[b]);
    tr.ng.push_back(n);
    tr.ng_err.push_back(std::max(res.sigma(3 + b), 1e-12));
    tr.jump.push_back(jump);
    prev = n;
  }
  return out;
}

VdcFit global_vdc_fit(const std::vector<VdcPoint>& points) {
  std::vector<VdcPoint> active = points;
  VdcFit fit = fit_vdc_once(active);
  for (int round = 0; round < 3; ++round) {
    std::vector<double> res(active.size());
    std::map<double, int> per_block;
    for (std::size_t i = 0; i < active.size(); ++i) {
      const auto& p = active[i];
      const auto it = std::lower_bound(fit.track.t_s.begin(), fit.track.t_s.end(), p.t_s);
      const double n = fit.track.ng[it - fit.track.t_s.begin()];
      const double h = 0.5 * fit.delta_f_hz * std::abs(std::cos(kTwoPi * (n + p.vdc_v / fit.v_period_v)));
      res[i] = std::max(std::abs(p.f_hi_hz - fit.f_mean_hz - h), std::abs(p.f_lo_hz - fit.f_mean_hz + h));
      ++per_block[p.t_s];
    }
    std::vector<double> sorted = res;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double limit = std::max(6.0 * 1.4826 * sorted[sorted.size() / 2], 1e-6 * fit.delta_f_hz);
    std::vector<VdcPoint> kept;
    for (std::size_t i = 0; i < active.size(); ++i) {
      if (res[i] > limit && per_block[active[i].t_s] > 5) {
        --per_block[active[i].t_s];
        continue;
      }
      kept.push_back(active[i]);
    }
    if (kept.size() == active.size()) break;
    active = std::move(kept);
    fit = fit_vdc_once(active);
  }
  fit.rejected_points = static_cast<int>(points.size() - active.size());
  return fit;
}

ChargeTrack splitting_only_track(const std::vector<VdcPoint>& points, double delta_f_hz) {
  if (!(delta_f_hz > 0.0)) throw InvalidArgument("delta_f must be positive");
  std::map<double, int> nearest;
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto it = nearest.find(points[i].t_s);
    if (it == nearest.end() || std::abs(points[i].vdc_v) < std::abs(points[it->second].vdc_v))
      nearest[points[i].t_s] = static_cast<int>(i);
  }
  ChargeTrack out;
  for (const auto& [t, i] : nearest) {
    const double split = points[i].f_hi_hz - points[i].f_lo_hz;
    out.t_s.push_back(t);
    out.ng.push_back(std::acos(std::clamp(split / delta_f_hz, 0.0, 1.0)) / kTwoPi);
    out.ng_err.push_back(1e-12);
    out.jump.push_back(0);
  }
  return out;
}

ChargeTrack simulate_charge_drift(double step_sigma, double dt_s, int n, std::uint64_t seed,
                                  double start) {
  if (step_sigma < 0.0) throw InvalidArgument("step_sigma must be >= 0");
  if (!(dt_s > 0.0) || n < 1) throw InvalidArgument("need dt > 0 and n >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  ChargeTrack out;
  out.t_s.resize(n);
  out.ng.resize(n);
  // Simulated samples are exact; a nominal tiny error keeps the invariant.
  out.ng_err.assign(n, 1e-12);
  out.jump.assign(n, 0);
  double x = start;
  for (int i = 0; i < n; ++i) {
    if (i > 0) x += step_sigma * g(rng);
    out.t_s[i] = i * dt_s;
    out.ng[i] = x;
  }
  return out;
}

double calibrate_step_sigma(double target_e2_per_hz, double f_ref_hz, double dt_s) {
  if (!(target_e2_per_hz > 0.0 && f_ref_hz > 0.0 && dt_s > 0.0))
    throw InvalidArgument("calibration needs positive inputs");
  if (!(f_ref_hz < 0.5 / dt_s)) throw InvalidArgument("f_ref above Nyquist");
  return std::sin(std::numbers::pi * f_ref_hz * dt_s) * std::sqrt(target_e2_per_hz / (2.0 * dt_s));
}

}  // namespace qcharge
