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

#include <numbers>

namespace qcharge::units {

// SI 2019 exact values.
inline constexpr double kPlanck = 6.62607015e-34;           // J s
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kHbar = kPlanck / (2.0 * std::numbers::pi);

/// Reduced flux quantum hbar / 2e, in weber.
inline constexpr double kReducedFluxQuantum = kHbar / (2.0 * kElementaryCharge);

/// phi0^2 / h in henry * hertz. E_L / h = kPhi0SqOverH / L.
inline constexpr double kPhi0SqOverH = kReducedFluxQuantum * kReducedFluxQuantum / kPlanck;

inline constexpr double kGHz = 1e9;
inline constexpr double kMHz = 1e6;
inline constexpr double kKHz = 1e3;

/// Inductive energy E_L/h in GHz of an inductance `l_henry` (E_L = phi0^2 / L).
double inductance_to_el(double l_henry);

/// Inverse of inductance_to_el: inductance in henry for E_L/h in GHz.
double el_to_inductance(double e_l_ghz);

struct SeriesInductance {
  double magnitude_henry = 0.0;
  /// True when the second harmonic that produced it was negative.
  bool negative_harmonic = false;
};

/// |L_s| = 4 phi0^2 |E_J2| / E_J^2 (energies as E/h), the series inductance that
/// would produce a second Josephson harmonic E_J2 on top of E_J.
SeriesInductance series_inductance(double e_j2_ghz, double e_j_ghz);

}  // namespace qcharge::units
