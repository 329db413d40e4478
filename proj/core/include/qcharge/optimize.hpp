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

#pragma once

#include <functional>

#include <Eigen/Dense>

namespace qcharge {

/// Residual vector r(x); the objective is sum r_i^2.
using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct OptimizeOptions {
  /// Nelder-Mead iterations before the Levenberg-Marquardt polish (0 skips it).
  int max_simplex_iterations = 300;
  int max_lm_iterations = 200;
  /// Finite-difference step, relative to max(|x_i|, scale_i).
  double fd_step = 1e-6;
  /// Convergence when the scaled LM step falls below this.
  double step_tol = 1e-10;
  /// Or when the relative decrease of the objective falls below this.
  double cost_tol = 1e-14;
  /// Initial simplex edge, relative to scale.
  double simplex_step = 0.02;
  /// Per-parameter scale; empty means max(|x0_i|, 1e-3).
  Eigen::VectorXd scale;
};

struct OptimizeResult {
  Eigen::VectorXd x;
  Eigen::VectorXd residuals;
  double cost = 0.0;  // sum of squared residuals
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  /// Residual-based covariance (J^T J)^-1 * cost / (m - p); zero when m <= p.
  Eigen::MatrixXd covariance;
  Eigen::VectorXd sigma;
};

/// Forward-difference Jacobian of f at x given r0 = f(x).
Eigen::MatrixXd finite_difference_jacobian(const ResidualFn& f, const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& r0, const Eigen::VectorXd& scale,
                                           double rel_step);

/// Downhill simplex on the scalar objective sum f(x)^2.
OptimizeResult nelder_mead(const ResidualFn& f, const Eigen::VectorXd& x0,
                           const OptimizeOptions& opts);

/// Levenberg-Marquardt with Marquardt diagonal damping.
OptimizeResult levenberg_marquardt(const ResidualFn& f, const Eigen::VectorXd& x0,
                                   const OptimizeOptions& opts);

/// Nelder-Mead followed by Levenberg-Marquardt; covariance from the final Jacobian.
OptimizeResult least_squares(const ResidualFn& f, const Eigen::VectorXd& x0,
                             const OptimizeOptions& opts = {});

}  // namespace qcharge
