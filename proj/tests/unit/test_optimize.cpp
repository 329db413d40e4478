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
#include <random>

#include <gtest/gtest.h>

#include "qcharge/optimize.hpp"

namespace qcharge {
namespace {

Eigen::VectorXd rosenbrock(const Eigen::VectorXd& x) {
  Eigen::VectorXd r(2);
  r << 10.0 * (x(1) - x(0) * x(0)), 1.0 - x(0);
  return r;
}

TEST(NelderMead, FindsRosenbrockValley) {
  OptimizeOptions o;
  o.max_simplex_iterations = 4000;
  o.simplex_step = 0.5;
  const OptimizeResult r = nelder_mead(rosenbrock, Eigen::Vector2d(-1.2, 1.0), o);
  EXPECT_NEAR(r.x(0), 1.0, 1e-3);
  EXPECT_NEAR(r.x(1), 1.0, 2e-3);
  EXPECT_LT(r.cost, 1e-6);
}

TEST(LevenbergMarquardt, SolvesRosenbrock) {
  const OptimizeResult r = levenberg_marquardt(rosenbrock, Eigen::Vector2d(-1.2, 1.0), {});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x(0), 1.0, 1e-8);
  EXPECT_NEAR(r.x(1), 1.0, 1e-8);
}

TEST(FiniteDifference, MatchesAnalyticJacobian) {
  const Eigen::Vector2d x(0.3, -0.7);
  const Eigen::MatrixXd j = finite_difference_jacobian(rosenbrock, x, rosenbrock(x), Eigen::Vector2d(1, 1), 1e-7);
  Eigen::Matrix2d want;
  want << -20.0 * x(0), 10.0, -1.0, 0.0;
  EXPECT_LT((j - want).cwiseAbs().maxCoeff(), 1e-5);
}

// Oracle for a linear model: the normal equations give the estimate and
// (A^T A)^-1 s^2 the covariance, s^2 = rss / (m - p).
TEST(LeastSquares, LinearModelMatchesNormalEquations) {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> noise(0.0, 0.05);
  const int m = 40;
  Eigen::MatrixXd a(m, 3);
  Eigen::VectorXd y(m);
  for (int i = 0; i < m; ++i) {
    const double t = i / 10.0;
    a.row(i) << 1.0, t, t * t;
    y(i) = 0.5 - 1.2 * t + 0.3 * t * t + noise(gen);
  }
  const ResidualFn f = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd { return a * p - y; };
  const OptimizeResult r = least_squares(f, Eigen::Vector3d(1.0, 1.0, 1.0));

  const Eigen::MatrixXd ata = a.transpose() * a;
  const Eigen::VectorXd p = ata.ldlt().solve(a.transpose() * y);
  const double s2 = (a * p - y).squaredNorm() / (m - 3);
  const Eigen::MatrixXd cov = ata.inverse() * s2;
  EXPECT_TRUE(r.converged);
  EXPECT_LT((r.x - p).cwiseAbs().maxCoeff(), 1e-7);
  EXPECT_LT((r.covariance - cov).cwiseAbs().maxCoeff(), 1e-6 * cov.cwiseAbs().maxCoeff());
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(r.sigma(i), std::sqrt(cov(i, i)), 1e-6 * std::sqrt(cov(i, i)));
  EXPECT_NEAR(r.cost, (a * p - y).squaredNorm(), 1e-10);
}

TEST(LeastSquares, CovarianceZeroWithoutDegreesOfFreedom) {
  const ResidualFn f = [](const Eigen::VectorXd& p) -> Eigen::VectorXd {
    Eigen::VectorXd r(2);
    r << p(0) - 1.0, p(1) + 2.0;
    return r;
  };
  const OptimizeResult r = least_squares(f, Eigen::Vector2d(0.0, 0.0));
  EXPECT_NEAR(r.x(0), 1.0, 1e-9);
  EXPECT_NEAR(r.x(1), -2.0, 1e-9);
  EXPECT_EQ(r.covariance.cwiseAbs().maxCoeff(), 0.0);
}

TEST(LeastSquares, RespectsParameterScale) {
  // Parameters differing by nine orders of magnitude.
  const ResidualFn f = [](const Eigen::VectorXd& p) -> Eigen::VectorXd {
    Eigen::VectorXd r(3);
    r << (p(0) - 3e-9) * 1e9, (p(1) - 4e3) * 1e-3, (p(0) * 1e9) * (p(1) * 1e-3) - 12.0;
    return r;
  };
  OptimizeOptions o;
  o.scale = Eigen::Vector2d(1e-9, 1e3);
  const OptimizeResult r = least_squares(f, Eigen::Vector2d(1e-9, 1e3), o);
  EXPECT_NEAR(r.x(0), 3e-9, 1e-15);
  EXPECT_NEAR(r.x(1), 4e3, 1e-5);
}

}  // namespace
}  // namespace qcharge
