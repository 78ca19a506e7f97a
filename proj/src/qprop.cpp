#include "qkr/qprop.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numbers>
#include <string>
#include <unordered_map>
#include <utility>

#include "qkr/errors.hpp"

namespace qkr {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kEdgeLimit = 1e-8;
constexpr std::size_t kTableCacheCap = 16;

struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

// FFTW plan creation is not thread-safe; executing a plan on fresh arrays
// of matching alignment is. One in-place plan pair per transform length.
PlanPair plans_for(int length) {
  static std::mutex mu;
  static std::unordered_map<int, PlanPair> cache;
  std::scoped_lock lock(mu);
  auto it = cache.find(length);
  if (it == cache.end()) {
    fftw_complex* tmp = fftw_alloc_complex(static_cast<std::size_t>(length));
    PlanPair p;
    p.bwd = fftw_plan_dft_1d(length, tmp, tmp, FFTW_BACKWARD, FFTW_ESTIMATE);
    p.fwd = fftw_plan_dft_1d(length, tmp, tmp, FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_free(tmp);
    it = cache.emplace(length, p).first;
  }
  return it->second;
}

std::uint64_t bits(double x) { return std::bit_cast<std::uint64_t>(x); }

}  // namespace

QuantumState::QuantumState(int n_max, double quasimomentum, int init_n) {
  if (n_max < 2) throw RangeError("state: n_max must be >= 2");
  if (!(quasimomentum >= -0.5 && quasimomentum < 0.5))
    throw RangeError("state: quasimomentum must lie in [-0.5, 0.5)");
  int length = 4;
  while (length < 2 * n_max) length *= 2;
  allocate(length);
  std::fill_n(amps_, length_, std::complex<double>{});
  beta_ = quasimomentum;
  if (init_n < -length_ / 2 || init_n >= length_ / 2)
    throw RangeError("state: init_n outside the momentum grid");
  amps_[slot_of(init_n)] = 1.0;
}

QuantumState::~QuantumState() { release(); }

QuantumState::QuantumState(const QuantumState& other) {
  allocate(other.length_);
  std::copy_n(other.amps_, length_, amps_);
  beta_ = other.beta_;
  time_ = other.time_;
}

QuantumState& QuantumState::operator=(const QuantumState& other) {
  if (this == &other) return *this;
  if (length_ != other.length_) {
    release();
    allocate(other.length_);
  }
  std::copy_n(other.amps_, length_, amps_);
  beta_ = other.beta_;
  time_ = other.time_;
  drift_cache_.clear();
  kick_cache_.clear();
  return *this;
}

QuantumState::QuantumState(QuantumState&& other) noexcept
    : amps_(std::exchange(other.amps_, nullptr)),
      length_(std::exchange(other.length_, 0)),
      beta_(other.beta_),
      time_(other.time_),
      drift_cache_(std::move(other.drift_cache_)),
      kick_cache_(std::move(other.kick_cache_)) {}

QuantumState& QuantumState::operator=(QuantumState&& other) noexcept {
  if (this == &other) return *this;
  release();
  amps_ = std::exchange(other.amps_, nullptr);
  length_ = std::exchange(other.length_, 0);
  beta_ = other.beta_;
  time_ = other.time_;
  drift_cache_ = std::move(other.drift_cache_);
  kick_cache_ = std::move(other.kick_cache_);
  return *this;
}

void QuantumState::allocate(int length) {
  amps_ = reinterpret_cast<std::complex<double>*>(
      fftw_alloc_complex(static_cast<std::size_t>(length)));
  length_ = length;
}

void QuantumState::release() {
  if (amps_) fftw_free(amps_);
  amps_ = nullptr;
  length_ = 0;
}

double QuantumState::norm_sq() const {
  double s = 0;
  for (int i = 0; i < length_; ++i) s += std::norm(amps_[i]);
  return s;
}

double QuantumState::mean_p2() const {
  double s = 0;
  for (int i = 0; i < length_; ++i) {
    const double p = momentum_at(i) + beta_;
    s += std::norm(amps_[i]) * p * p;
  }
  return s;
}

double QuantumState::window_prob(double halfwidth) const {
  double s = 0;
  for (int i = 0; i < length_; ++i) {
    if (std::abs(momentum_at(i) + beta_) <= halfwidth) s += std::norm(amps_[i]);
  }
  return s;
}

double QuantumState::edge_occupancy() const {
  const int m = std::max(1, length_ / 100);
  // Slots around i = L/2 hold the outermost momenta n = +-L/2 (DFT order).
  double s = 0;
  for (int i = length_ / 2 - m; i < length_ / 2 + m; ++i)
    s += std::norm(amps_[i]);
  return s;
}

void QuantumState::shift_momentum(double delta) {
  const double raw = beta_ + delta;
  double carry = std::floor(raw + 0.5);
  beta_ = raw - carry;
  if (beta_ >= 0.5) {
    beta_ -= 1.0;
    carry += 1.0;
  } else if (beta_ < -0.5) {
    beta_ += 1.0;
    carry -= 1.0;
  }
  const int shift = static_cast<int>(carry);
  if (shift != 0) {
    // new[(i + shift) mod L] = old[i]: left-rotate by (-shift mod L).
    const int k = ((-shift) % length_ + length_) % length_;
    std::rotate(amps_, amps_ + k, amps_ + length_);
  }
  drift_cache_.clear();
}

const std::vector<std::complex<double>>& QuantumState::drift_table(
    double dt, double hbar_eff) {
  const std::uint64_t k0 = bits(dt), k1 = bits(beta_), k2 = bits(hbar_eff);
  for (const auto& t : drift_cache_)
    if (t.k0 == k0 && t.k1 == k1 && t.k2 == k2) return t.mult;
  if (drift_cache_.size() >= kTableCacheCap) drift_cache_.erase(drift_cache_.begin());
  Table t{k0, k1, k2, {}};
  t.mult.resize(static_cast<std::size_t>(length_));
  const double half = 0.5 * hbar_eff * dt;
  for (int i = 0; i < length_; ++i) {
    const double p = momentum_at(i) + beta_;
    const double phase = std::remainder(half * p * p, kTwoPi);
    t.mult[static_cast<std::size_t>(i)] = {std::cos(phase), -std::sin(phase)};
  }
  drift_cache_.push_back(std::move(t));
  return drift_cache_.back().mult;
}

const std::vector<std::complex<double>>& QuantumState::kick_table(
    double amplitude, double hbar_eff) {
  const std::uint64_t k0 = bits(amplitude), k2 = bits(hbar_eff);
  for (const auto& t : kick_cache_)
    if (t.k0 == k0 && t.k2 == k2) return t.mult;
  if (kick_cache_.size() >= kTableCacheCap) kick_cache_.erase(kick_cache_.begin());
  Table t{k0, 0, k2, {}};
  t.mult.resize(static_cast<std::size_t>(length_));
  // The forward transform's 1/L normalization is folded into the table.
  const double scale = 1.0 / length_;
  const double coef = amplitude / hbar_eff;
  for (int j = 0; j < length_; ++j) {
    const double theta = kTwoPi * j / length_;
    t.mult[static_cast<std::size_t>(j)] =
        std::polar(scale, -coef * std::sin(theta));
  }
  kick_cache_.push_back(std::move(t));
  return kick_cache_.back().mult;
}

void QuantumState::kick_slice(double amplitude, double hbar_eff) {
  const PlanPair plans = plans_for(length_);
  auto* a = reinterpret_cast<fftw_complex*>(amps_);
  fftw_execute_dft(plans.bwd, a, a);  // momentum -> theta grid
  const auto& mult = kick_table(amplitude, hbar_eff);
  for (int j = 0; j < length_; ++j) amps_[j] *= mult[static_cast<std::size_t>(j)];
  fftw_execute_dft(plans.fwd, a, a);  // theta -> momentum, scaled via table
  const double edge = edge_occupancy();
  if (edge >= kEdgeLimit) {
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "kick: probability %.3g in the edge guard band of the "
                  "%d-point grid; enlarge n_max",
                  edge, length_);
    throw GridError(buf, length_);
  }
}

void free_flight(QuantumState& s, double dt, double hbar_eff) {
  if (dt != 0) {
    const auto& mult = s.drift_table(dt, hbar_eff);
    for (int i = 0; i < s.length_; ++i)
      s.amps_[i] *= mult[static_cast<std::size_t>(i)];
  }
  s.time_ += dt;
}

void delta_kick(QuantumState& s, double amplitude, double hbar_eff) {
  if (amplitude == 0) return;
  s.kick_slice(amplitude, hbar_eff);
}

void square_pulse(QuantumState& s, double amplitude, double pulse_frac,
                  double hbar_eff, int substeps) {
  if (substeps < 1) throw RangeError("square_pulse: substeps must be >= 1");
  if (!(pulse_frac > 0)) throw RangeError("square_pulse: pulse_frac must be > 0");
  const double h = pulse_frac / substeps;
  const double slice = amplitude / substeps;
  free_flight(s, 0.5 * h, hbar_eff);
  for (int k = 0; k < substeps; ++k) {
    if (slice != 0) s.kick_slice(slice, hbar_eff);
    if (k + 1 < substeps) free_flight(s, h, hbar_eff);
  }
  free_flight(s, 0.5 * h, hbar_eff);
}

void propagate(QuantumState& s, const KickTimeline& timeline, double hbar_eff,
               double pulse_frac, int substeps) {
  const auto& ev = timeline.events;
  if (ev.empty()) return;
  if (s.time() > ev.front().time + 1e-12)
    throw RangeError("propagate: state time is already past the first kick");
  const double lead = ev.front().time - s.time();
  if (lead > 0) free_flight(s, lead, hbar_eff);
  for (std::size_t i = 0; i < ev.size(); ++i) {
    try {
      if (pulse_frac > 0)
        square_pulse(s, ev[i].amplitude, pulse_frac, hbar_eff, substeps);
      else
        delta_kick(s, ev[i].amplitude, hbar_eff);
    } catch (const GridError& e) {
      throw GridError(std::string(e.what()) + " (event " + std::to_string(i) +
                          ")",
                      e.transform_length);
    }
    if (i + 1 < ev.size()) {
      const double flight = timeline.gap(i) - pulse_frac;
      if (flight > 0) free_flight(s, flight, hbar_eff);
    }
  }
  s.set_time(ev.back().time + pulse_frac);
}

}  // namespace qkr
