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

#include "qcharge/telegraph.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "qcharge/error.hpp"
#include "qcharge/optimize.hpp"

namespace qcharge {

void TelegraphTrace::validate() const {
  if (t_s.size() != values.size()) throw InvalidArgument("timestamps and values lengths differ");
  if (t_s.size() < 2) throw InvalidArgument("telegraph trace needs at least two samples");
  for (std::size_t i = 1; i < t_s.size(); ++i)
    if (!(t_s[i] > t_s[i - 1])) throw InvalidArgument("timestamps must be strictly increasing");
}

double TelegraphTrace::mean_interval() const {
  if (mean_interval_s > 0.0) return mean_interval_s;
  validate();
  return (t_s.back() - t_s.front()) / (t_s.size() - 1);
}

TelegraphSimulation simulate_telegraph(const TelegraphParams& p, std::uint64_t seed) {
  if (!(p.gamma_ps_hz >= 0.0)) throw InvalidArgument("gamma_ps must be >= 0");
  if (!(p.mean_interval_s > 0.0)) throw InvalidArgument("mean interval must be positive");
  if (!(p.gamma_ps_hz * p.mean_interval_s < 0.5)) {
    std::ostringstream os;
    os << "switching not resolvable: gamma_ps * interval = " << p.gamma_ps_hz * p.mean_interval_s
       << " >= 0.5; use a sampling interval below " << 0.5 / p.gamma_ps_hz << " s";
    throw InvalidArgument(os.str());
  }
  if (!(p.p_even >= 0.0 && p.p_even <= 1.0)) throw InvalidArgument("p_even must be in [0, 1]");
  if (!(p.jitter >= 0.0 && p.jitter <= 1.0)) throw InvalidArgument("jitter must be in [0, 1]");
  if (p.n_samples < 2) throw InvalidArgument("need at least two samples");
  if (p.noise_sigma < 0.0) throw InvalidArgument("noise_sigma must be >= 0");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const double rate_eo = 2.0 * p.gamma_ps_hz * (1.0 - p.p_even);
  const double rate_oe = 2.0 * p.gamma_ps_hz * p.p_even;
  const double lambda = rate_eo + rate_oe;

  TelegraphSimulation sim;
  auto& tr = sim.trace;
  tr.mean_interval_s = p.mean_interval_s;
  tr.t_s.resize(p.n_samples);
  tr.values.resize(p.n_samples);
  sim.odd.resize(p.n_samples);

  bool odd = uni(rng) >= p.p_even;
  double t = 0.0;
  long long n_odd = 0;
  for (int i = 0; i < p.n_samples; ++i) {
    if (i > 0) {
      const double dt = p.mean_interval_s * ((1.0 - p.jitter) + p.jitter * expo(rng));
      t += dt;
      if (lambda > 0.0) {
        const double relax = 1.0 - std::exp(-lambda * dt);
        const double flip = (odd ? rate_oe : rate_eo) / lambda * relax;
        if (uni(rng) < flip) odd = !odd;
      }
    }
    tr.t_s[i] = t;
    tr.values[i] = (odd ? p.i_odd : p.i_even) + (p.noise_sigma > 0.0 ? p.noise_sigma * gauss(rng) : 0.0);
    sim.odd[i] = odd;
    n_odd += odd;
  }
  // Zero-length jitter draws would break strict ordering.
  for (int i = 1; i < p.n_samples; ++i)
    if (!(tr.t_s[i] > tr.t_s[i - 1])) tr.t_s[i] = std::nextafter(tr.t_s[i - 1], 1e300);
  sim.realized_odd_fraction = static_cast<double>(n_odd) / p.n_samples;
  return sim;
}

Autocorrelation autocorrelation(const TelegraphTrace& trace, double max_lag_s, int batches) {
  trace.validate();
  if (!(max_lag_s > 0.0)) throw InvalidArgument("max_lag must be positive");
  if (batches < 2) throw InvalidArgument("need at least two batches");
  const std::size_t n = trace.t_s.size();
  const double bin = trace.mean_interval();
  const int n_lags = static_cast<int>(std::floor(max_lag_s / bin)) + 1;
  const double reach = (n_lags - 0.5) * bin;
  // Slot 0 holds the self products I(t)^2, which carry the readout noise;
  // slot k + 1 holds pairs whose separation rounds to k intervals.
  const int n_bins = n_lags + 1;

  Autocorrelation out;
  if (n < 10000) out.warnings.push_back("fewer than 1e4 samples; statistics will be poor");
  if (max_lag_s > 0.1 * (trace.t_s.back() - trace.t_s.front()))
    out.warnings.push_back("max_lag exceeds a tenth of the record span");

  std::vector<double> sum(static_cast<std::size_t>(batches) * n_bins, 0.0);
  std::vector<long long> cnt(sum.size(), 0);
  std::vector<double> lag_sum(n_bins, 0.0);
  const double* t = trace.t_s.data();
  const double* v = trace.values.data();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t b = i * batches / n;
    double* srow = &sum[b * n_bins];
    long long* crow = &cnt[b * n_bins];
    srow[0] += v[i] * v[i];
    crow[0] += 1;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = t[j] - t[i];
      if (d > reach) break;
      const int k = static_cast<int>(std::lround(d / bin)) + 1;
      srow[k] += v[i] * v[j];
      crow[k] += 1;
      lag_sum[k] += d;
    }
  }
  for (int k = 0; k < n_bins; ++k) {
    double total = 0.0;
    long long count = 0;
    for (int b = 0; b < batches; ++b) {
      total += sum[b * n_bins + k];
      count += cnt[b * n_bins + k];
    }
    if (count == 0) continue;
    const double mean = total / count;
    double ss = 0.0;
    int used = 0;
    for (int b = 0; b < batches; ++b) {
      const long long c = cnt[b * n_bins + k];
      if (c == 0) continue;
      const double m = sum[b * n_bins + k] / c;
      ss += (m - mean) * (m - mean);
      ++used;
    }
    out.lag_s.push_back(lag_sum[k] / count);
    out.c.push_back(mean);
    out.std_error.push_back(used > 1 ? std::sqrt(ss / (used - 1) / used) : 0.0);
    out.counts.push_back(count);
  }
  return out;
}

AutocorrFit fit_stretched_exponential(const Autocorrelation& ac) {
  std::vector<int> use;
  for (std::size_t k = 0; k < ac.lag_s.size(); ++k)
    if (ac.lag_s[k] > 0.0) use.push_back(static_cast<int>(k));
  if (use.size() < 5) throw InvalidArgument("need at least 5 non-zero lag bins");
  const int m = static_cast<int>(use.size());
  Eigen::VectorXd t(m), c(m), w(m);
  bool weighted = ac.std_error.size() == ac.lag_s.size();
  for (int i = 0; i < m; ++i) {
    t(i) = ac.lag_s[use[i]];
    c(i) = ac.c[use[i]];
    if (weighted && !(ac.std_error[use[i]] > 0.0)) weighted = false;
  }
  for (int i = 0; i < m; ++i) w(i) = weighted ? 1.0 / ac.std_error[use[i]] : 1.0;

  const int tail = std::max(1, m / 4);
  const double b0 = c.tail(tail).mean();
  const double a0 = c(0) - b0;
  const double scale_c = std::max({std::abs(c(0)), std::abs(b0), 1e-300});
  const double se0 = ac.std_error.empty() ? 0.0 : ac.std_error[use[0]];
  if (!(std::abs(a0) > std::max(5.0 * se0, 1e-9 * scale_c)))
    throw InvalidArgument("autocorrelation does not decay over the lag grid");
  double t_e = t(m - 1);
  for (int i = 0; i < m; ++i)
    if ((c(i) - b0) / a0 < std::exp(-1.0)) {
      t_e = t(i);
      break;
    }
  const double g0 = 1.0 / (2.0 * t_e);

  auto fit = [&](bool free_beta) {
    const int np = free_beta ? 4 : 3;
    ResidualFn f = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
      const double beta = free_beta ? x(3) : 1.0;
      if (!(x(1) > 0.0) || !(beta > 0.0)) throw InvalidArgument("rate and beta must be positive");
      const Eigen::ArrayXd model = x(0) * (-(2.0 * x(1) * t.array()).pow(beta)).exp() + x(2);
      return ((model - c.array()) * w.array()).matrix();
    };
    Eigen::VectorXd x0(np), scale(np);
    x0.head<3>() << a0, g0, b0;
    scale.head<3>() << std::abs(a0), g0, std::max(std::abs(b0), std::abs(a0));
    if (free_beta) x0(3) = 1.0, scale(3) = 1.0;
    OptimizeOptions opts;
    opts.scale = scale;
    return least_squares(f, x0, opts);
  };

  const OptimizeResult full = fit(true);
  const OptimizeResult markov = fit(false);
  AutocorrFit out;
  out.amplitude = full.x(0);
  out.gamma_ps_hz = full.x(1);
  out.offset = full.x(2);
  out.beta = full.x(3);
  out.gamma_sigma_hz = full.sigma(1);
  out.beta_sigma = full.sigma(3);
  out.markov_gamma_hz = markov.x(1);
  out.converged = full.converged && markov.converged && out.beta > 0.0 && out.beta <= 1.5;
  return out;
}

Imbalance estimate_imbalance(const TelegraphTrace& trace, double even_hint, double odd_hint) {
  trace.validate();
  if (even_hint == odd_hint) throw InvalidArgument("level hints must differ");
  const auto& v = trace.values;
  const std::size_t n = v.size();
  double c_even = even_hint, c_odd = odd_hint;
  std::vector<std::uint8_t> odd(n);
  for (int iter = 0; iter < 100; ++iter) {
    const double thr = 0.5 * (c_even + c_odd);
    const bool odd_high = c_odd > c_even;
    double s_e = 0.0, s_o = 0.0;
    long long n_e = 0, n_o = 0;
    for (std::size_t i = 0; i < n; ++i) {
      odd[i] = (v[i] > thr) == odd_high;
      if (odd[i]) s_o += v[i], ++n_o;
      else s_e += v[i], ++n_e;
    }
    if (n_e == 0 || n_o == 0) throw InvalidArgument("telegraph values show a single level");
    const double ne = s_e / n_e, no = s_o / n_o;
    const bool done = ne == c_even && no == c_odd;
    c_even = ne;
    c_odd = no;
    if (done) break;
  }

  double ss = 0.0;
  long long n_odd = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = v[i] - (odd[i] ? c_odd : c_even);
    ss += d * d;
    n_odd += odd[i];
  }
  const double raw = static_cast<double>(n_odd) / n;
  double sigma = std::sqrt(ss / n);
  double w_odd = raw;

  // Overlapping levels truncate the 2-means clusters, which biases their means
  // and width; an equal-width two-Gaussian mixture fitted by EM does not.
  if (sigma > 1e-9 * std::abs(c_odd - c_even)) {
    std::vector<double> resp(n);
    for (int iter = 0; iter < 500; ++iter) {
      double r_sum = 0.0, r_v = 0.0, q_v = 0.0, sq = 0.0;
      const double inv2s2 = 0.5 / (sigma * sigma);
      const double prior = std::log(w_odd / (1.0 - w_odd));
      for (std::size_t i = 0; i < n; ++i) {
        const double de = v[i] - c_even, dd = v[i] - c_odd;
        // Posterior odd probability, written to stay finite for far tails.
        const double z = (de * de - dd * dd) * inv2s2 + prior;
        const double r = z > 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
        resp[i] = r;
        r_sum += r;
        r_v += r * v[i];
        q_v += (1.0 - r) * v[i];
      }
      const double new_w = std::clamp(r_sum / n, 1e-12, 1.0 - 1e-12);
      const double new_odd = r_v / std::max(r_sum, 1e-300);
      const double new_even = q_v / std::max(n - r_sum, 1e-300);
      for (std::size_t i = 0; i < n; ++i) {
        const double r = resp[i];
        sq += r * (v[i] - new_odd) * (v[i] - new_odd) + (1.0 - r) * (v[i] - new_even) * (v[i] - new_even);
      }
      const double new_sigma = std::sqrt(sq / n);
      const bool done = std::abs(new_w - w_odd) < 1e-10 && std::abs(new_odd - c_odd) < 1e-10 * sigma &&
                        std::abs(new_even - c_even) < 1e-10 * sigma;
      w_odd = new_w;
      c_odd = new_odd;
      c_even = new_even;
      sigma = new_sigma;
      if (done) break;
    }
  }

  Imbalance out;
  out.level_even = c_even;
  out.level_odd = c_odd;
  out.threshold = 0.5 * (c_even + c_odd);
  out.misclassification =
      sigma > 0.0 ? 0.5 * std::erfc(std::abs(c_odd - c_even) / (2.0 * sigma * std::sqrt(2.0))) : 0.0;
  out.p_odd = std::clamp(w_odd, 0.0, 1.0);
  out.p_even = 1.0 - out.p_odd;

  // Lag-1 correlation of the state sequence inflates the binomial variance.
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = odd[i] - raw;
    den += a * a;
    if (i + 1 < n) num += a * (odd[i + 1] - raw);
  }
  const double r = den > 0.0 ? std::clamp(num / den, 0.0, 0.999999) : 0.0;
  out.uncertainty = std::sqrt(raw * (1.0 - raw) / n * (1.0 + r) / (1.0 - r));
  return out;
}

}  // namespace qcharge
