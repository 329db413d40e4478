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

#include "qcharge/circuit.hpp"

namespace qcharge {

/// Below this E_L/h (GHz) the shunted spectrum is a dense multi-well manifold
/// and ladder identification is refused.
inline constexpr double kShuntValidityFloorGhz = 1e-3;

/// Oscillator basis used for the shunted model. The reference inductive scale
/// is max(E_L, E_J1/16) rather than E_L alone: at small E_L the bare LC ground
/// state is far wider than the Josephson wells and the truncation converges
/// very slowly. Any scale gives the same Hamiltonian in the complete basis.
struct OscillatorBasis {
  int dim = 0;
  double e_ref = 0.0;
  double phi_zpf = 0.0;
  double n_zpf = 0.0;
};

OscillatorBasis shunted_basis(const CircuitParams& params, int dim);

/// Dense H_N + (E_L/2)(phi + phi_ext)^2 in the oscillator basis of dimension
/// config.osc_dim, written in the shifted variable theta = phi + phi_ext.
/// n_g and parity are gauged away by the shunt and do not enter.
Eigen::MatrixXd build_shunted_hamiltonian(const CircuitParams& params, const SolverConfig& config);

struct ShuntedSpectrum {
  Eigen::VectorXd energies;  // ascending
  Eigen::MatrixXd vectors;   // columns, in the oscillator basis
  OscillatorBasis basis;
};

/// All eigenpairs at dimension `dim`. At phi_ext = 0 the two parity blocks are
/// diagonalized separately.
ShuntedSpectrum shunted_eigensystem(const CircuitParams& params, int dim);

/// Greedy ladder f_{i,i+1}, i = 0..n_levels-2: from the ground state, step to
/// the higher state with the largest |<next|n|current>|. Throws AmbiguityError
/// when the runner-up is within 1% of the best candidate.
TransitionSet plasmon_transitions(const ShuntedSpectrum& spectrum, const SolverConfig& config,
                                  Parity parity = Parity::even);

/// plasmon_transitions at a fixed dimension, without convergence certification.
/// Used inside fits, where the caller certifies the final point.
Eigen::VectorXd shunted_ladder(const CircuitParams& params, int dim, int n_levels);

/// Ladder frequencies certified by doubling osc_dim (at most twice).
TransitionSet shunted_transitions(const CircuitParams& params, const SolverConfig& config);

}  // namespace qcharge
