#include "qkr/ensemble.hpp"

#include <cmath>
#include <string>

#include "parallel.hpp"
#include "qkr/errors.hpp"

namespace qkr {

namespace {
// Margin beyond the doubled grid: covers the integer part of a folded
// quasimomentum when trajectory contributions are classed.
constexpr std::int64_t kHistPad = 8;

// Half transform length the engine will actually use for a requested n_max
// (QuantumState rounds 2*n_max up to a power of two).
std::int64_t grid_half(int n_max) {
  std::int64_t length = 4;
  while (length < 2 * static_cast<std::int64_t>(n_max)) length *= 2;
  return length / 2;
}
}  // namespace

void EnsembleConfig::validate() const {
  if (n_traj < 1) throw ConfigError("ensemble: n_traj must be >= 1");
  if (init_sigma < 0) throw ConfigError("ensemble: init_sigma must be >= 0");
  if (!(detect_halfwidth > 0))
    throw ConfigError("ensemble: detect_halfwidth must be positive");
  if (se_prob < 0 || se_prob >= 1)
    throw ConfigError("ensemble: se_prob must lie in [0, 1)");
  if (beam_model == BeamModel::gaussian && cloud_to_waist < 0)
    throw ConfigError("ensemble: cloud_to_waist must be >= 0");
  if (n_max < 2) throw ConfigError("ensemble: n_max must be >= 2");
  if (substeps < 1) throw ConfigError("ensemble: substeps must be >= 1");
  if (threads < 1) throw ConfigError("ensemble: threads must be >= 1");
  if (bootstrap_resamples < 2)
    throw ConfigError("ensemble: bootstrap_resamples must be >= 2");
  if (snapshot_every < 0)
    throw ConfigError("ensemble: snapshot_every must be >= 0");
}

double MomentumHistogram::total() const {
  double s = 0;
  for (double b : bins) s += b;
  return s;
}

double MomentumHistogram::window_sum(double halfwidth) const {
  double s = 0;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const std::int64_t n = n_min + static_cast<std::int64_t>(i);
    if (std::abs(static_cast<double>(n)) <= halfwidth) s += bins[i];
  }
  return s;
}

std::pair<std::int64_t, double> sample_initial(const EnsembleConfig& cfg,
                                               RngStream& rng) {
  if (cfg.init_sigma == 0) return {0, 0.0};
  const double p0 = cfg.init_sigma * rng.next_gaussian();
  std::int64_t n0 = std::llround(p0);
  double beta = p0 - static_cast<double>(n0);
  if (beta >= 0.5) {
    beta -= 1.0;
    n0 += 1;
  } else if (beta < -0.5) {
    beta += 1.0;
    n0 -= 1;
  }
  return {n0, beta};
}

double draw_kick_strength(const EnsembleConfig& cfg, double base_k,
                          RngStream& rng) {
  if (cfg.beam_model == BeamModel::off) return base_k;
  const double s1 = rng.next_gaussian();
  const double s2 = rng.next_gaussian();
  const double rho2 = cfg.cloud_to_waist * cfg.cloud_to_waist;
  return base_k * std::exp(-2.0 * rho2 * (s1 * s1 + s2 * s2));
}

bool apply_spontaneous_emission(QuantumState& state, double se_prob,
                                RngStream& rng) {
  if (se_prob <= 0) return false;
  if (rng.next_double() >= se_prob) return false;
  state.shift_momentum(rng.next_double() - 0.5);
  return true;
}

namespace {

// One quantum trajectory at the given grid size. Touches the accumulator
// only after the full propagation succeeded, so a GridError retry at a
// larger grid leaves no partial contribution behind.
void quantum_traj(const ScaledParams& p, const EnsembleConfig& cfg,
                  const KickTimeline& tl, std::int64_t traj, int n_max,
                  std::int64_t hist_offset, internal::Accumulator& acc) {
  RngStream rng(cfg.seed, static_cast<std::uint64_t>(traj));
  const auto [n0, beta] = sample_initial(cfg, rng);
  const double k_eff = draw_kick_strength(cfg, p.kick_strength, rng);
  const double amp_scale = k_eff / p.kick_strength;
  const std::int64_t n_bound = p.n_kicks;

  QuantumState st(n_max, beta, static_cast<int>(n0));
  std::vector<double> p2(static_cast<std::size_t>(n_bound) + 1);
  const bool snap = cfg.snapshot_every > 0 && cfg.snapshot_hook && traj == 0;
  auto record = [&](std::int64_t b) {
    p2[static_cast<std::size_t>(b)] = st.mean_p2();
    if (snap && b % cfg.snapshot_every == 0) {
      // The boundary falls between events; drift a copy up to t = b so the
      // hook sees the state it documents. <p^2> needs no such care: it is
      // invariant under free flight.
      const double dt = static_cast<double>(b) - st.time();
      if (dt > 0) {
        QuantumState at_b = st;
        free_flight(at_b, dt, p.hbar_eff);
        cfg.snapshot_hook(b, at_b);
      } else {
        cfg.snapshot_hook(b, st);
      }
    }
  };

  record(0);
  std::int64_t b = 1;
  std::int64_t se = 0;
  for (std::size_t i = 0; i < tl.events.size(); ++i) {
    while (b <= n_bound && tl.event_at_or_after(i, b)) record(b++);
    if (i > 0) {
      const double flight = tl.gap(i - 1) - p.pulse_frac;
      if (flight > 0) free_flight(st, flight, p.hbar_eff);
    }
    const double amp = tl.events[i].amplitude * amp_scale;
    if (p.pulse_frac > 0)
      square_pulse(st, amp, p.pulse_frac, p.hbar_eff, cfg.substeps);
    else
      delta_kick(st, amp, p.hbar_eff);
    if (apply_spontaneous_emission(st, cfg.se_prob, rng)) ++se;
  }
  while (b <= n_bound) record(b++);

  const std::int64_t shift = std::llround(st.beta());
  const int len = st.length();
  double pi0 = 0;
  for (int i = 0; i < len; ++i) {
    const double w = std::norm(st.data()[i]);
    const std::int64_t cls = st.momentum_at(i) + shift;
    acc.hist[static_cast<std::size_t>(cls + hist_offset)] += w;
    if (std::abs(static_cast<double>(cls)) <= cfg.detect_halfwidth) pi0 += w;
  }
  for (std::size_t k = 0; k < p2.size(); ++k) acc.p2_sum[k] += p2[k];
  acc.pi0.push_back(pi0);
  acc.se_events += se;
}

}  // namespace

RunResult run_ensemble(const ScaledParams& p, const EnsembleConfig& cfg) {
  p.validate();
  cfg.validate();
  const KickTimeline tl = build_timeline(p);
  const std::int64_t half = grid_half(cfg.n_max);
  const std::int64_t offset = 2 * half + kHistPad;
  const std::size_t hist_size = static_cast<std::size_t>(2 * offset + 1);
  const std::size_t series_size = static_cast<std::size_t>(p.n_kicks) + 1;

  internal::Accumulator total;
  internal::run_chunks(
      cfg.n_traj, cfg.threads, hist_size, series_size,
      [&](std::int64_t t, internal::Accumulator& acc) {
        try {
          try {
            quantum_traj(p, cfg, tl, t, cfg.n_max, offset, acc);
          } catch (const GridError&) {
            quantum_traj(p, cfg, tl, t, 2 * cfg.n_max, offset, acc);
          }
        } catch (const Error& e) {
          throw Error("trajectory " + std::to_string(t) + ": " + e.what());
        }
      },
      total);

  RunResult out;
  const double inv = 1.0 / static_cast<double>(cfg.n_traj);
  out.hist.bins.resize(hist_size);
  for (std::size_t i = 0; i < hist_size; ++i)
    out.hist.bins[i] = total.hist[i] * inv;
  out.hist.n_min = -offset;
  out.hist.n_traj = cfg.n_traj;
  out.hist.params = p;
  out.p2_series.resize(series_size);
  for (std::size_t k = 0; k < series_size; ++k)
    out.p2_series[k] = total.p2_sum[k] * inv;
  out.p2 = out.p2_series.back();
  out.per_traj_pi0 = std::move(total.pi0);
  out.pi0 = out.hist.window_sum(cfg.detect_halfwidth);
  out.pi0_err =
      bootstrap_err(out.per_traj_pi0, cfg.seed, cfg.bootstrap_resamples);
  out.se_events = total.se_events;
  return out;
}

double bootstrap_err(const std::vector<double>& vals, std::uint64_t seed,
                     int resamples) {
  const std::int64_t n = static_cast<std::int64_t>(vals.size());
  if (n < 2 || resamples < 2) return 0;
  RngStream rng(seed, kBootstrapStreamBase);
  double sum = 0, sum_sq = 0;
  for (int b = 0; b < resamples; ++b) {
    double m = 0;
    for (std::int64_t i = 0; i < n; ++i) {
      const auto j =
          static_cast<std::size_t>(rng.next_double() * static_cast<double>(n));
      m += vals[j];
    }
    m /= static_cast<double>(n);
    sum += m;
    sum_sq += m * m;
  }
  const double mean = sum / resamples;
  return std::sqrt(std::max(0.0, sum_sq / resamples - mean * mean));
}

}  // namespace qkr
