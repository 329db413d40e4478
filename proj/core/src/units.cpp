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

#include "qcharge/units.hpp"

#include <cmath>

#include "qcharge/error.hpp"

namespace qcharge::units {

double inductance_to_el(double l_henry) {
  if (!(l_henry > 0.0) || !std::isfinite(l_henry)) {
    throw InvalidArgument("inductance must be positive and finite");
  }
  return kPhi0SqOverH / l_henry / kGHz;
}

double el_to_inductance(double e_l_ghz) {
  if (!(e_l_ghz > 0.0) || !std::isfinite(e_l_ghz)) {
    throw InvalidArgument("inductive energy must be positive and finite");
  }
  return kPhi0SqOverH / (e_l_ghz * kGHz);
}

SeriesInductance series_inductance(double e_j2_ghz, double e_j_ghz) {
  if (!(e_j_ghz > 0.0)) throw InvalidArgument("E_J must be positive");
  SeriesInductance out;
  out.magnitude_henry = 4.0 * kPhi0SqOverH * std::abs(e_j2_ghz) * kGHz / (e_j_ghz * kGHz * e_j_ghz * kGHz);
  out.negative_harmonic = e_j2_ghz < 0.0;
  return out;
}

}  // namespace qcharge::units
