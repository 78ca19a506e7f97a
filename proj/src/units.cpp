#include "qkr/units.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "qkr/errors.hpp"

namespace qkr {

void LabParams::validate() const {
  if (!(f1 > 0)) throw ConfigError("lab: f1 must be positive");
  if (!(pulse_duration > 0))
    throw ConfigError("lab: pulse_duration must be positive");
  if (!(atom_mass > 0)) throw ConfigError("lab: atom_mass must be positive");
  if (!(wavenumber > 0)) throw ConfigError("lab: wavenumber must be positive");
  if (rabi_sq) {
    if (!(*rabi_sq > 0))
      throw ConfigError("lab: rabi_sq must be positive when given");
    if (detuning == 0)
      throw ConfigError("lab: detuning must be nonzero when rabi_sq is given");
  }
  if (temperature < 0) throw ConfigError("lab: temperature must be >= 0");
}

FreqRatio FreqRatio::from_rational(std::int64_t num, std::int64_t den) {
  if (num <= 0 || den <= 0)
    throw ConfigError("freq_ratio: numerator and denominator must be positive");
  const std::int64_t g = std::gcd(num, den);
  FreqRatio r;
  r.num_ = num / g;
  r.den_ = den / g;
  r.value_ = static_cast<double>(r.num_) / static_cast<double>(r.den_);
  r.exact_ = true;
  if (r.value_ > 1.0)
    throw ConfigError("freq_ratio: must satisfy 0 < r <= 1, got " +
                      std::to_string(r.value_));
  return r;
}

FreqRatio FreqRatio::from_double(double value) {
  if (!(value > 0) || value > 1.0)
    throw ConfigError("freq_ratio: must satisfy 0 < r <= 1, got " +
                      std::to_string(value));
  FreqRatio r;
  r.value_ = value;
  r.exact_ = false;
  return r;
}

void ScaledParams::validate() const {
  if (!(kick_strength > 0))
    throw ConfigError("scaled: kick_strength must be positive");
  if (!(hbar_eff > 0)) throw ConfigError("scaled: hbar_eff must be positive");
  if (amp_ratio < 0 || amp_ratio > 1)
    throw ConfigError("scaled: amp_ratio must lie in [0, 1]");
  const double r = freq_ratio.value();
  if (!(r > 0) || r > 1)
    throw ConfigError("scaled: freq_ratio must satisfy 0 < r <= 1");
  if (n_kicks < 1) throw ConfigError("scaled: n_kicks must be >= 1");
  if (pulse_frac < 0) throw ConfigError("scaled: pulse_frac must be >= 0");
  // Coarse bound only; exact pairwise overlaps are caught when the merged
  // timeline is built and the actual gaps are known.
  if (pulse_frac >= 1.0 / (2.0 * r))
    throw ConfigError("scaled: pulse_frac must be < 1/(2 r); pulses overlap");
}

double hbar_eff(const LabParams& lab) {
  const double t1 = 1.0 / lab.f1;
  return 4.0 * constants::hbar * lab.wavenumber * lab.wavenumber * t1 /
         lab.atom_mass;
}

double kick_strength(const LabParams& lab) {
  if (!lab.rabi_sq)
    throw ConfigError("lab: rabi_sq is required to derive kick_strength");
  if (lab.detuning == 0)
    throw ConfigError("lab: detuning must be nonzero to derive kick_strength");
  const double t1 = 1.0 / lab.f1;
  return *lab.rabi_sq * constants::hbar * lab.wavenumber * lab.wavenumber *
         lab.pulse_duration * t1 / (2.0 * lab.atom_mass * std::abs(lab.detuning));
}

double scaled_amplitude(const ScaledParams& p) {
  return p.amp_ratio * p.kick_strength * p.kick_strength /
         (p.hbar_eff * p.hbar_eff);
}

std::int64_t estimate_loc_time(const ScaledParams& p, double fit_const) {
  const double k = p.kick_strength / p.hbar_eff;
  return std::llround(fit_const * k * k);
}

double thermal_sigma(const LabParams& lab) {
  return std::sqrt(constants::k_boltzmann * lab.temperature * lab.atom_mass) /
         (2.0 * constants::hbar * lab.wavenumber);
}

}  // namespace qkr
