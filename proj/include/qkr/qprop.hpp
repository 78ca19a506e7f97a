#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "qkr/schedule.hpp"

namespace qkr {

inline constexpr int kDefaultNMax = 1024;   // transform length 2048
inline constexpr int kDefaultSubsteps = 10;

// Wavefunction of one atom over the momentum ladder p = n + beta
// (units of 2*hbar*k_L), with the quasimomentum beta a conserved scalar:
// both the kick (couples n -> n+-1) and the free flight (diagonal) leave it
// untouched, so it is not a grid dimension.
//
// Amplitudes are stored in DFT order: slot i holds momentum index
// n = i for i < L/2 and n = i - L otherwise, with L the power-of-two
// transform length (n_max = L/2). Buffers are FFTW-aligned.
class QuantumState {
 public:
  // Plane wave at integer momentum init_n. n_max is rounded up so the
  // transform length 2*n_max is a power of two.
  QuantumState(int n_max, double quasimomentum, int init_n = 0);
  ~QuantumState();
  QuantumState(const QuantumState& other);
  QuantumState& operator=(const QuantumState& other);
  QuantumState(QuantumState&& other) noexcept;
  QuantumState& operator=(QuantumState&& other) noexcept;

  int length() const { return length_; }
  int n_max() const { return length_ / 2; }
  double beta() const { return beta_; }
  double time() const { return time_; }
  void set_time(double t) { time_ = t; }

  std::complex<double>* data() { return amps_; }
  const std::complex<double>* data() const { return amps_; }
  int momentum_at(int slot) const {
    return slot < length_ / 2 ? slot : slot - length_;
  }
  int slot_of(int n) const { return n >= 0 ? n : n + length_; }
  std::complex<double> amp(int n) const { return amps_[slot_of(n)]; }

  double norm_sq() const;
  // <p^2> with p = n + beta, in units of (2 hbar k_L)^2.
  double mean_p2() const;
  // Probability inside the detection window |n + beta| <= halfwidth.
  double window_prob(double halfwidth) const;
  // Probability in the outer guard band (outermost ~2% of slots).
  double edge_occupancy() const;

  // Photon-recoil shift: physical momentum changes by delta; beta is folded
  // back into [-0.5, 0.5) and the integer part relabels the ladder.
  void shift_momentum(double delta);

  friend void free_flight(QuantumState& s, double dt, double hbar_eff);
  friend void delta_kick(QuantumState& s, double amplitude, double hbar_eff);
  friend void square_pulse(QuantumState& s, double amplitude,
                           double pulse_frac, double hbar_eff, int substeps);

 private:
  struct Table {
    std::uint64_t k0 = 0, k1 = 0, k2 = 0;
    std::vector<std::complex<double>> mult;
  };

  void allocate(int length);
  void release();
  const std::vector<std::complex<double>>& drift_table(double dt,
                                                       double hbar_eff);
  const std::vector<std::complex<double>>& kick_table(double amplitude,
                                                      double hbar_eff);
  void kick_slice(double amplitude, double hbar_eff);

  std::complex<double>* amps_ = nullptr;  // fftw_malloc'd, length_ entries
  int length_ = 0;
  double beta_ = 0;
  double time_ = 0;
  std::vector<Table> drift_cache_;
  std::vector<Table> kick_cache_;
};

// Multiplies each amplitude by exp(-i hbar_eff (n+beta)^2 dt / 2) and
// advances time. dt < 0 runs the flight backwards.
void free_flight(QuantumState& s, double dt, double hbar_eff);

// Instantaneous kick exp(-i amplitude sin(theta) / hbar_eff), applied on the
// theta grid between a transform pair. Throws GridError when probability
// reaches the edge guard band (enlarge n_max and retry).
void delta_kick(QuantumState& s, double amplitude, double hbar_eff);

// Square pulse of duration pulse_frac via symmetric (Strang) splitting with
// the given number of kick slices; total drift inside equals pulse_frac.
void square_pulse(QuantumState& s, double amplitude, double pulse_frac,
                  double hbar_eff, int substeps);

// Full schedule: free flights over the inter-event gaps, one kick per event.
// GridError from a kick is rethrown with the event index attached.
void propagate(QuantumState& s, const KickTimeline& timeline, double hbar_eff,
               double pulse_frac, int substeps = kDefaultSubsteps);

}  // namespace qkr
