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

#include <Eigen/Dense>

namespace qcharge::oscillator {

/// Truncated matrices of cos(alpha X) and sin(alpha X), X = a + a^dagger, on
/// Fock states 0..dim-1. Elements come from the closed form of the displacement
/// operator exp(i alpha X):
///   <m| e^{i alpha X} |n> = e^{-alpha^2/2} sqrt(n!/m!) (i alpha)^(m-n) L_n^(m-n)(alpha^2),
/// evaluated by a normalized Laguerre recurrence so that no factorial or
/// polynomial is ever formed explicitly. cos picks the even offsets, sin the odd.
struct Trig {
  Eigen::MatrixXd cos;
  Eigen::MatrixXd sin;
};

Trig displacement_trig(double alpha, int dim, bool with_sin = true);

/// (a + a^dagger)^2 truncated to dim.
Eigen::MatrixXd position_squared(int dim);

/// -(a^dagger - a)^2 truncated to dim, i.e. the square of i(a^dagger - a).
Eigen::MatrixXd momentum_squared(int dim);

/// y = (a^dagger - a) x for a real vector x. The charge operator is
/// n = i n_zpf (a^dagger - a), so |<u|n|v>| = n_zpf |u . ((a^dagger - a) v)|.
Eigen::VectorXd apply_ladder_difference(const Eigen::VectorXd& x);

}  // namespace qcharge::oscillator
