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

#include "qcharge/oscillator.hpp"

#include <cmath>

#include "qcharge/error.hpp"

namespace qcharge::oscillator {

Trig displacement_trig(double alpha, int dim, bool with_sin) {
  if (dim < 1) throw InvalidArgument("oscillator dimension must be positive");
  Trig out;
  out.cos = Eigen::MatrixXd::Zero(dim, dim);
  if (with_sin) out.sin = Eigen::MatrixXd::Zero(dim, dim);
  const double x = alpha * alpha;
  const double log_alpha = alpha != 0.0 ? std::log(std::abs(alpha)) : 0.0;
  const double sign_alpha = alpha < 0.0 ? -1.0 : 1.0;

  for (int d = 0; d < dim; ++d) {
    const bool even = (d % 2) == 0;
    if (!even && !with_sin) continue;
    if (alpha == 0.0 && d > 0) break;
    // h_n = e^{-x/2} alpha^d sqrt(n!/(n+d)!) L_n^(d)(x), started in log space.
    const double log_h0 = -0.5 * x + d * log_alpha - 0.5 * std::lgamma(d + 1.0);
    double h_prev = 0.0;
    double h = std::exp(log_h0) * (d % 2 == 1 ? sign_alpha : 1.0);
    // i^d: even d -> (-1)^(d/2) real part; odd d -> (-1)^((d-1)/2) imaginary part.
    const double phase = ((d / 2) % 2 == 0) ? 1.0 : -1.0;
    Eigen::MatrixXd& target = even ? out.cos : out.sin;
    for (int n = 0; n + d < dim; ++n) {
      const double v = phase * h;
      target(n + d, n) = v;
      target(n, n + d) = v;
      const double nn = n;
      const double next = ((2.0 * nn + 1.0 + d - x) * h - std::sqrt(nn * (nn + d)) * h_prev) /
                          std::sqrt((nn + 1.0) * (nn + 1.0 + d));
      h_prev = h;
      h = next;
    }
  }
  return out;
}

Eigen::MatrixXd position_squared(int dim) {
  // (a + a^dag)^2 = a^2 + a^dag^2 + 2 a^dag a + 1
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) {
    m(n, n) = 2.0 * n + 1.0;
    if (n + 2 < dim) {
      const double v = std::sqrt((n + 1.0) * (n + 2.0));
      m(n + 2, n) = v;
      m(n, n + 2) = v;
    }
  }
  return m;
}

Eigen::MatrixXd momentum_squared(int dim) {
  // -(a^dag - a)^2 = 2 a^dag a + 1 - a^2 - a^dag^2
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) {
    m(n, n) = 2.0 * n + 1.0;
    if (n + 2 < dim) {
      const double v = -std::sqrt((n + 1.0) * (n + 2.0));
      m(n + 2, n) = v;
      m(n, n + 2) = v;
    }
  }
  return m;
}

Eigen::VectorXd apply_ladder_difference(const Eigen::VectorXd& x) {
  const Eigen::Index dim = x.size();
  Eigen::VectorXd y = Eigen::VectorXd::Zero(dim);
  for (Eigen::Index n = 0; n < dim; ++n) {
    // (a^dag x)_n = sqrt(n) x_{n-1};  (a x)_n = sqrt(n+1) x_{n+1}
    if (n > 0) y(n) += std::sqrt(static_cast<double>(n)) * x(n - 1);
    if (n + 1 < dim) y(n) -= std::sqrt(static_cast<double>(n + 1)) * x(n + 1);
  }
  return y;
}

}  // namespace qcharge::oscillator
