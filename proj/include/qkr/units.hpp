#pragma once

#include <cstdint>
#include <numbers>
#include <optional>

namespace qkr {

namespace constants {
// SI values, fixed at compile time so that preset reconstruction does not
// depend on user input.
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double k_boltzmann = 1.380649e-23;      // J/K (exact)
inline constexpr double cesium_mass = 2.2069469515e-25;  // kg, 133Cs
inline constexpr double lattice_wavelength = 852.0e-9;   // m, Cs D2 line
inline constexpr double lattice_wavenumber =
    2.0 * std::numbers::pi / lattice_wavelength;  // 1/m
}  // namespace constants

// Localization-time fit constants N_L = round(c * (K/hbar_eff)^2). The two
// sub-series of the bundled presets are matched by different constants; the
// scaling itself is only a proportionality, so neither value is physics.
inline constexpr double kLocTimeConstDefault = 3.6;  // preset rows 1-4
inline constexpr double kLocTimeConstAlt = 4.2;      // preset rows 5-7

// Laboratory-side parameters of a kicked-atom run. Only used to derive the
// dimensionless parameters below; kept as audit metadata afterwards.
struct LabParams {
  double f1 = 0;                // primary kick frequency [Hz]
  double detuning = 0;          // laser detuning from resonance [Hz], signed
  double power = 0;             // laser power [W], informational only
  double pulse_duration = 0;    // kick duration tau [s]
  double atom_mass = constants::cesium_mass;          // M [kg]
  double wavenumber = constants::lattice_wavenumber;  // k_L [1/m]
  std::optional<double> rabi_sq;  // squared resonant Rabi frequency [1/s^2]
  double temperature = 0;         // initial cloud temperature [K]

  void validate() const;  // throws ConfigError
};

// Ratio r = f2/f1 of the two kick series. Holds an exact rational when the
// config spells one ("681/1000"); kick times are then generated by integer
// arithmetic, avoiding cumulative rounding of t = n/r over long horizons.
class FreqRatio {
 public:
  FreqRatio() = default;
  static FreqRatio from_rational(std::int64_t num, std::int64_t den);
  static FreqRatio from_double(double value);

  double value() const {
    return exact_ ? static_cast<double>(num_) / static_cast<double>(den_)
                  : value_;
  }
  bool exact() const { return exact_; }
  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 0;
  double value_ = 0;
  bool exact_ = false;
};

// Dimensionless knobs that fully define one run.
struct ScaledParams {
  double kick_strength = 0;  // K, primary kick amplitude
  double hbar_eff = 0;       // effective Planck constant
  double amp_ratio = 0;      // a, secondary/primary amplitude ratio in [0,1]
  FreqRatio freq_ratio = FreqRatio::from_rational(681, 1000);  // r in (0,1]
  std::int64_t n_kicks = 1;  // N, length of the primary series
  double pulse_frac = 0;     // tau/T1; 0 = ideal delta kicks

  void validate() const;  // throws ConfigError
};

// hbar_eff = 4*hbar*k_L^2*T1/M, the "quanticity" knob set by the kick rate.
double hbar_eff(const LabParams& lab);

// |K| = Omega1^2*hbar*k_L^2*tau*T1 / (2*M*|Delta|). The sign of the detuning
// only translates the potential in theta and does not affect the dynamics.
double kick_strength(const LabParams& lab);

// atilde = a*K^2/hbar_eff^2, the scaled amplitude governing the onset of
// delocalization.
double scaled_amplitude(const ScaledParams& p);

// N_L estimate, round(c*(K/hbar_eff)^2).
std::int64_t estimate_loc_time(const ScaledParams& p,
                               double fit_const = kLocTimeConstDefault);

// Momentum standard deviation of a thermal cloud, in units of 2*hbar*k_L.
double thermal_sigma(const LabParams& lab);

}  // namespace qkr
