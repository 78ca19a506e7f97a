#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "qkr/qprop.hpp"
#include "qkr/rng.hpp"
#include "qkr/schedule.hpp"
#include "qkr/units.hpp"

namespace qkr {

enum class Engine { quantum, classical };
enum class BeamModel { off, gaussian };

// Ensemble knobs shared by the quantum and classical engines. The RNG draw
// order per trajectory is a stable contract (golden files depend on it):
//   quantum:   [init_sigma > 0: one gaussian] then [beam gaussian: two
//              gaussians], then per kick event [se_prob > 0: one uniform,
//              plus one more when the emission fires];
//   classical: one uniform (theta), then [init_sigma > 0: one gaussian].
// Each gaussian consumes exactly two uniforms of stream (seed, trajectory).
struct EnsembleConfig {
  std::int64_t n_traj = 1;
  std::uint64_t seed = 0;
  double init_sigma = 0;         // thermal momentum spread, units of 2 hbar k_L
  double detect_halfwidth = 2.0; // zero-velocity window half-width, same units
  BeamModel beam_model = BeamModel::off;
  double cloud_to_waist = 0;     // rho of the gaussian beam model
  double se_prob = 0;            // spontaneous-emission probability per kick
  int n_max = kDefaultNMax;
  int substeps = kDefaultSubsteps;
  int threads = 1;
  int bootstrap_resamples = 200;

  // Debug hook: invoked for trajectory 0 at every primary-period boundary b
  // with b % snapshot_every == 0 (state at t = b, before any kick there).
  std::int64_t snapshot_every = 0;
  std::function<void(std::int64_t, const QuantumState&)> snapshot_hook;

  void validate() const;
};

// Ensemble-averaged probability per integer momentum class (units of
// 2 hbar k_L). Covers the doubled grid so trajectories that regrew their
// transform once still land inside.
struct MomentumHistogram {
  std::vector<double> bins;
  std::int64_t n_min = 0;  // momentum class of bins[0]
  std::int64_t n_traj = 0;
  ScaledParams params;

  std::int64_t n_max_class() const {
    return n_min + static_cast<std::int64_t>(bins.size()) - 1;
  }
  double total() const;
  // Probability of classes |n| <= halfwidth.
  double window_sum(double halfwidth) const;
};

struct RunResult {
  MomentumHistogram hist;
  double pi0 = 0;      // window_sum(detect_halfwidth) of hist
  double pi0_err = 0;  // bootstrap standard error over trajectories
  double p2 = 0;       // <p^2>, units (2 hbar k_L)^2
  // <p^2> at primary-period boundaries t = 0 .. N (value at t = k is taken
  // before any kick scheduled exactly there). N+1 entries.
  std::vector<double> p2_series;
  std::vector<double> per_traj_pi0;  // trajectory order, for resampling
  std::int64_t se_events = 0;
};

// Thermal initial condition: gaussian total momentum p0 (std init_sigma)
// split as p0 = n0 + beta with integer n0 and beta folded into [-0.5, 0.5).
// init_sigma = 0 draws nothing and yields (0, 0).
std::pair<std::int64_t, double> sample_initial(const EnsembleConfig& cfg,
                                               RngStream& rng);

// Per-trajectory kick strength. The gaussian beam model samples a gaussian
// cloud position (two transverse coordinates) in a gaussian beam:
// K_eff = K exp(-2 rho^2 (s1^2 + s2^2)); `off` returns K without drawing.
double draw_kick_strength(const EnsembleConfig& cfg, double base_k,
                          RngStream& rng);

// With probability se_prob: shift the quasimomentum by a recoil uniform in
// [-0.5, 0.5) (one-photon recoil projected and folded), amplitudes
// untouched. Returns whether the emission fired.
bool apply_spontaneous_emission(QuantumState& state, double se_prob,
                                RngStream& rng);

// Quantum ensemble: per-trajectory Philox streams keyed by (seed, index),
// fixed-size trajectory chunks reduced in chunk order, so the result is
// bit-identical for any thread count. Grid regrowth: a trajectory that
// trips the edge guard is rerun once at twice the transform length.
RunResult run_ensemble(const ScaledParams& p, const EnsembleConfig& cfg);

// Bootstrap standard error of the mean of vals (resampling with
// replacement, fixed stream (seed, kBootstrapStreamBase)).
double bootstrap_err(const std::vector<double>& vals, std::uint64_t seed,
                     int resamples);

}  // namespace qkr
