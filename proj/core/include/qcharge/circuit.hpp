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

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qcharge {

enum class Parity { even, odd };

const char* to_string(Parity p);
Parity parse_parity(const std::string& s);

/// One circuit model instance. All energies are E/h in GHz.
struct CircuitParams {
  double e_c = 0.0;
  /// Josephson harmonic amplitudes E_J1..E_JN (signed); e_j[0] is E_J1.
  std::vector<double> e_j;
  /// Inductive shunt energy; 0 selects the unshunted charge-basis model.
  double e_l = 0.0;
  /// Charge offset in Cooper pairs.
  double n_g = 0.0;
  Parity parity = Parity::even;
  /// Reduced external flux through the shunt loop (radians).
  double phi_ext = 0.0;

  int harmonic_order() const { return static_cast<int>(e_j.size()); }
  /// Offset shift contributed by quasiparticle parity: 0 or 1/2.
  double parity_offset() const { return parity == Parity::odd ? 0.5 : 0.0; }
  void validate() const;
};

struct SolverConfig {
  /// Charge basis spans n in [-charge_cutoff, charge_cutoff].
  int charge_cutoff = 40;
  /// Oscillator-basis truncation for the shunted model.
  int osc_dim = 400;
  /// Relative change allowed when the cutoff is doubled.
  double conv_tol = 1e-9;
  int n_levels = 5;

  void validate() const;
};

enum class Provenance { measured, predicted };

struct Transition {
  int lower = 0;
  int upper = 1;
  double freq_ghz = 0.0;
  Parity parity = Parity::even;
  double n_g = 0.0;
};

struct TransitionSet {
  std::vector<Transition> entries;
  Provenance provenance = Provenance::predicted;
  /// Solver remarks (degeneracies, convergence detail).
  std::vector<std::string> notes;

  /// Measured sets need strictly positive frequencies; predicted sets may
  /// carry zero gaps at exact degeneracies.
  void validate() const;
  /// Frequency of transition (lower, upper) in the given branch, or throws.
  double frequency(int lower, int upper, Parity parity, double n_g) const;
};

/// Dense charge-basis Hamiltonian of the transmon with Josephson harmonics:
/// diagonal 4 E_C (n - n_g - p/2)^2, and -E_Jk/2 on the k-th off-diagonals.
Eigen::MatrixXd build_charge_hamiltonian(const CircuitParams& params, const SolverConfig& config);

/// Lowest `count` eigenvalues of the charge-basis Hamiltonian at the given cutoff.
Eigen::VectorXd charge_levels(const CircuitParams& params, int charge_cutoff, int count);

/// Adjacent-level transitions f_{i,i+1}, i = 0..n_levels-2, certified by
/// doubling the relevant cutoff. Dispatches on e_l: 0 uses the charge basis,
/// e_l > 0 the shunted oscillator-basis model.
TransitionSet transition_frequencies(const CircuitParams& params, const SolverConfig& config);

/// Charge dispersion |f_{i,i+1}(n_g=0, even) - f_{i,i+1}(n_g=0, odd)| in GHz.
double charge_dispersion(const CircuitParams& params, const SolverConfig& config, int level);

struct PerturbativeResult {
  double freq_ghz = 0.0;
  /// Set when E_L / E_J exceeds the perturbative range (0.05).
  bool outside_validity = false;
};

/// Second-order perturbative f_{i,i+1} of the inductively shunted transmon at
/// n_g = 0: the single-harmonic transmon value plus
/// E_L sqrt(2 E_C / E_J) (1 - (i+1) E_L/(4 E_J) - phi_ext^2 E_L/(4 E_J)).
PerturbativeResult perturbative_transition(const CircuitParams& params, int level, double phi_ext,
                                           const SolverConfig& config = {});

/// f(0) - f(phi_ext) predicted by the flux-dispersion estimate
/// (phi_ext^2 / 8) (E_L / E_J)^2 f01.
double flux_shift_estimate(double e_l, double e_j, double f01, double phi_ext);

}  // namespace qcharge
