#include "qkr/classical.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "parallel.hpp"
#include "qkr/errors.hpp"

namespace qkr {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::int64_t kHistPad = 8;

std::int64_t grid_half(int n_max) {
  std::int64_t length = 4;
  while (length < 2 * static_cast<std::int64_t>(n_max)) length *= 2;
  return length / 2;
}
}  // namespace

ClassicalState classical_step(ClassicalState s, double dt, double amplitude) {
  s.theta = std::fmod(s.theta + s.p * dt, kTwoPi);
  if (s.theta < 0) s.theta += kTwoPi;
  s.p -= amplitude * std::cos(s.theta);
  return s;
}

RunResult run_classical(const ScaledParams& p, const EnsembleConfig& cfg) {
  p.validate();
  cfg.validate();
  if (cfg.beam_model != BeamModel::off || cfg.se_prob > 0)
    throw ConfigError(
        "classical: beam and spontaneous-emission realism are quantum-only");
  if (p.pulse_frac > 0)
    throw ConfigError("classical: finite pulses are not supported");

  const KickTimeline tl = build_timeline(p);
  const std::int64_t half = grid_half(cfg.n_max);
  const std::int64_t offset = 2 * half + kHistPad;
  const std::size_t hist_size = static_cast<std::size_t>(2 * offset + 1);
  const std::size_t series_size = static_cast<std::size_t>(p.n_kicks) + 1;
  const std::int64_t n_bound = p.n_kicks;

  internal::Accumulator total;
  internal::run_chunks(
      cfg.n_traj, cfg.threads, hist_size, series_size,
      [&](std::int64_t traj, internal::Accumulator& acc) {
        RngStream rng(cfg.seed, static_cast<std::uint64_t>(traj));
        ClassicalState s;
        s.theta = kTwoPi * rng.next_double();
        s.p = cfg.init_sigma > 0
                  ? p.hbar_eff * cfg.init_sigma * rng.next_gaussian()
                  : 0.0;
        std::vector<double> p2(series_size);
        auto p2_now = [&] {
          const double q = s.p / p.hbar_eff;
          return q * q;
        };
        p2[0] = p2_now();
        std::int64_t b = 1;
        for (std::size_t i = 0; i < tl.events.size(); ++i) {
          while (b <= n_bound && tl.event_at_or_after(i, b))
            p2[static_cast<std::size_t>(b++)] = p2_now();
          const double dt = i == 0 ? tl.events.front().time : tl.gap(i - 1);
          s = classical_step(s, dt, tl.events[i].amplitude);
        }
        while (b <= n_bound) p2[static_cast<std::size_t>(b++)] = p2_now();

        // Outliers beyond the grid-sized range land in the edge bins so
        // normalization is preserved.
        const std::int64_t cls =
            std::clamp<std::int64_t>(std::llround(s.p / p.hbar_eff), -offset,
                                     offset);
        acc.hist[static_cast<std::size_t>(cls + offset)] += 1.0;
        acc.pi0.push_back(
            std::abs(static_cast<double>(cls)) <= cfg.detect_halfwidth ? 1.0
                                                                       : 0.0);
        for (std::size_t k = 0; k < series_size; ++k) acc.p2_sum[k] += p2[k];
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
  return out;
}

}  // namespace qkr
