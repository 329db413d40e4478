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

#include "qcharge/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "qcharge/error.hpp"

namespace qcharge {

namespace {

Eigen::VectorXd resolve_scale(const Eigen::VectorXd& x0, const OptimizeOptions& opts) {
  if (opts.scale.size() == x0.size()) return opts.scale.cwiseAbs();
  if (opts.scale.size() != 0) throw InvalidArgument("scale size does not match parameters");
  Eigen::VectorXd s(x0.size());
  for (Eigen::Index i = 0; i < x0.size(); ++i) s(i) = std::max(std::abs(x0(i)), 1e-3);
  return s;
}

double sum_sq(const Eigen::VectorXd& r) {
  const double c = r.squaredNorm();
  return std::isfinite(c) ? c : std::numeric_limits<double>::infinity();
}

// Evaluates f, turning library errors into an infinite cost so that a trial
// point outside the model's domain is simply rejected.
struct Evaluator {
  const ResidualFn& f;
  int count = 0;

  bool operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    ++count;
    try {
      r = f(x);
    } catch (const Error&) {
      return false;
    }
    return r.allFinite();
  }
};

void fill_covariance(const ResidualFn& f, const Eigen::VectorXd& scale, const OptimizeOptions& opts,
                     OptimizeResult& out) {
  const Eigen::Index p = out.x.size();
  const Eigen::Index m = out.residuals.size();
  out.covariance = Eigen::MatrixXd::Zero(p, p);
  out.sigma = Eigen::VectorXd::Zero(p);
  if (m <= p) return;
  const Eigen::MatrixXd j = finite_difference_jacobian(f, out.x, out.residuals, scale, opts.fd_step);
  out.evaluations += static_cast<int>(p);
  const Eigen::MatrixXd jtj = j.transpose() * j;
  const Eigen::MatrixXd inv = jtj.completeOrthogonalDecomposition().pseudoInverse();
  out.covariance = inv * (out.cost / static_cast<double>(m - p));
  out.sigma = out.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
}

}  // namespace

Eigen::MatrixXd finite_difference_jacobian(const ResidualFn& f, const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& r0, const Eigen::VectorXd& scale,
                                           double rel_step) {
  Eigen::MatrixXd j(r0.size(), x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double h = rel_step * std::max(std::abs(x(k)), scale(k));
    Eigen::VectorXd xp = x;
    xp(k) += h;
    const Eigen::VectorXd rp = f(xp);
    if (rp.size() != r0.size()) throw InvalidArgument("residual size changed between evaluations");
    j.col(k) = (rp - r0) / (xp(k) - x(k));
  }
  return j;
}

OptimizeResult nelder_mead(const ResidualFn& f, const Eigen::VectorXd& x0,
                           const OptimizeOptions& opts) {
  const Eigen::VectorXd scale = resolve_scale(x0, opts);
  const int n = static_cast<int>(x0.size());
  Evaluator eval{f};
  auto cost_at = [&](const Eigen::VectorXd& u, Eigen::VectorXd& r) {
    return eval(u.cwiseProduct(scale), r) ? sum_sq(r) : std::numeric_limits<double>::infinity();
  };

  std::vector<Eigen::VectorXd> pts(n + 1, x0.cwiseQuotient(scale));
  std::vector<double> cost(n + 1);
  std::vector<Eigen::VectorXd> res(n + 1);
  for (int i = 1; i <= n; ++i) pts[i](i - 1) += opts.simplex_step;
  for (int i = 0; i <= n; ++i) cost[i] = cost_at(pts[i], res[i]);

  // Dimension-adaptive coefficients (Gao and Han).
  const double alpha = 1.0, beta = 1.0 + 2.0 / n, gamma = 0.75 - 0.5 / n, delta = 1.0 - 1.0 / n;
  std::vector<int> order(n + 1);
  OptimizeResult out;
  int it = 0;
  for (; it < opts.max_simplex_iterations; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return cost[a] < cost[b]; });
    const int best = order.front(), worst = order.back(), second = order[n - 1];
    double spread = 0.0;
    for (int i = 0; i <= n; ++i) spread = std::max(spread, (pts[i] - pts[best]).cwiseAbs().maxCoeff());
    if (spread < opts.step_tol ||
        std::abs(cost[worst] - cost[best]) <= opts.cost_tol * std::max(cost[best], 1e-300)) {
      out.converged = true;
      break;
    }
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= n; ++i)
      if (i != worst) centroid += pts[i];
    centroid /= n;

    Eigen::VectorXd rr;
    const Eigen::VectorXd xr = centroid + alpha * (centroid - pts[worst]);
    const double fr = cost_at(xr, rr);
    if (fr < cost[best]) {
      Eigen::VectorXd re;
      const Eigen::VectorXd xe = centroid + beta * (xr - centroid);
      const double fe = cost_at(xe, re);
      if (fe < fr) {
        pts[worst] = xe, cost[worst] = fe, res[worst] = re;
      } else {
        pts[worst] = xr, cost[worst] = fr, res[worst] = rr;
      }
      continue;
    }
    if (fr < cost[second]) {
      pts[worst] = xr, cost[worst] = fr, res[worst] = rr;
      continue;
    }
    Eigen::VectorXd rc;
    const bool outside = fr < cost[worst];
    const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + gamma * (xr - centroid))
                                       : Eigen::VectorXd(centroid - gamma * (centroid - pts[worst]));
    const double fc = cost_at(xc, rc);
    if (fc < std::min(fr, cost[worst])) {
      pts[worst] = xc, cost[worst] = fc, res[worst] = rc;
      continue;
    }
    for (int i = 0; i <= n; ++i) {
      if (i == best) continue;
      pts[i] = pts[best] + delta * (pts[i] - pts[best]);
      cost[i] = cost_at(pts[i], res[i]);
    }
  }
  const int best = static_cast<int>(std::min_element(cost.begin(), cost.end()) - cost.begin());
  if (!std::isfinite(cost[best])) throw ConvergenceError("simplex found no valid point", cost[best]);
  out.x = pts[best].cwiseProduct(scale);
  out.residuals = res[best];
  out.cost = cost[best];
  out.iterations = it;
  out.evaluations = eval.count;
  return out;
}

OptimizeResult levenberg_marquardt(const ResidualFn& f, const Eigen::VectorXd& x0,
                                   const OptimizeOptions& opts) {
  const Eigen::VectorXd scale = resolve_scale(x0, opts);
  Evaluator eval{f};
  OptimizeResult out;
  out.x = x0;
  if (!eval(out.x, out.residuals)) throw InvalidArgument("residuals not finite at the initial point");
  out.cost = sum_sq(out.residuals);
  double lambda = 1e-3;
  int it = 0;
  for (; it < opts.max_lm_iterations; ++it) {
    if (out.cost == 0.0) {
      out.converged = true;
      break;
    }
    // Jacobian with respect to the scaled variables u = x / scale.
    Eigen::MatrixXd j = finite_difference_jacobian(f, out.x, out.residuals, scale, opts.fd_step);
    eval.count += static_cast<int>(out.x.size());
    j = j * scale.asDiagonal();
    const Eigen::MatrixXd a = j.transpose() * j;
    const Eigen::VectorXd g = j.transpose() * out.residuals;
    Eigen::VectorXd diag = a.diagonal().cwiseMax(1e-12 * std::max(a.diagonal().maxCoeff(), 1e-300));

    bool accepted = false;
    while (lambda < 1e16) {
      Eigen::MatrixXd m = a;
      m.diagonal() += lambda * diag;
      const Eigen::VectorXd du = m.ldlt().solve(-g);
      const Eigen::VectorXd xn = out.x + du.cwiseProduct(scale);
      Eigen::VectorXd rn;
      const double cn = eval(xn, rn) ? sum_sq(rn) : std::numeric_limits<double>::infinity();
      if (cn < out.cost) {
        const double decrease = (out.cost - cn) / out.cost;
        const double step = du.cwiseAbs().maxCoeff();
        out.x = xn;
        out.residuals = rn;
        out.cost = cn;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (step < opts.step_tol || decrease < opts.cost_tol) out.converged = true;
        break;
      }
      lambda *= 4.0;
    }
    if (!accepted) {
      // No descent direction left at finite-difference resolution.
      out.converged = true;
      break;
    }
    if (out.converged) break;
  }
  out.iterations = it;
  out.evaluations = eval.count;
  return out;
}

OptimizeResult least_squares(const ResidualFn& f, const Eigen::VectorXd& x0,
                             const OptimizeOptions& opts) {
  const Eigen::VectorXd scale = resolve_scale(x0, opts);
  OptimizeOptions o = opts;
  o.scale = scale;
  Eigen::VectorXd start = x0;
  int iterations = 0, evaluations = 0;
  if (o.max_simplex_iterations > 0) {
    const OptimizeResult nm = nelder_mead(f, x0, o);
    start = nm.x;
    iterations += nm.iterations;
    evaluations += nm.evaluations;
  }
  OptimizeResult out = levenberg_marquardt(f, start, o);
  out.iterations += iterations;
  out.evaluations += evaluations;
  fill_covariance(f, scale, o, out);
  return out;
}

}  // namespace qcharge
