#pragma once

#include "qkr/ensemble.hpp"

namespace qkr {

// Phase-space point of the classical map. p is the canonical momentum
// conjugate to theta (the map below is its exact Hamiltonian flow); the
// histogram and p^2 observables are reported in units of 2 hbar k_L, i.e.
// p / hbar_eff, so the curves overlay the quantum engine's.
struct ClassicalState {
  double theta = 0;  // [0, 2 pi)
  double p = 0;
};

// Drift theta <- theta + p dt (mod 2 pi), then the impulse
// p <- p - amplitude cos(theta) of the +amplitude sin(theta) potential.
ClassicalState classical_step(ClassicalState s, double dt, double amplitude);

// Classical twin of run_ensemble over the same merged timeline, with
// uniform theta and thermal momentum initial conditions. Beam and
// spontaneous-emission realism have no classical analog here and are
// rejected, as are finite pulses.
RunResult run_classical(const ScaledParams& p, const EnsembleConfig& cfg);

}  // namespace qkr
