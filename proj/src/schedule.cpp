#include "qkr/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "qkr/errors.hpp"

namespace qkr {

std::string_view to_string(SeriesTag tag) {
  switch (tag) {
    case SeriesTag::primary: return "primary";
    case SeriesTag::secondary: return "secondary";
    case SeriesTag::merged: return "merged";
  }
  return "?";
}

double KickTimeline::gap(std::size_t i) const {
  if (!ticks.empty())
    return static_cast<double>(ticks[i + 1] - ticks[i]) /
           static_cast<double>(tick_den);
  return events[i + 1].time - events[i].time;
}

bool KickTimeline::event_at_or_after(std::size_t i, std::int64_t t) const {
  if (!ticks.empty()) return ticks[i] >= t * tick_den;
  return events[i].time >= static_cast<double>(t) - 1e-9;
}

namespace {

struct RawEvent {
  std::int64_t tick;  // exact path; otherwise unused
  double time;
  double amplitude;
  SeriesTag tag;
};

std::string overlap_message(const KickEvent& a, const KickEvent& b,
                            double gap, double pulse_frac) {
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "schedule: finite pulses overlap between kicks at t=%.12g "
                "and t=%.12g (gap %.3g < pulse_frac %.3g)",
                a.time, b.time, gap, pulse_frac);
  return buf;
}

}  // namespace

KickTimeline build_timeline(const ScaledParams& p, double merge_tolerance) {
  p.validate();
  if (merge_tolerance < 0 || merge_tolerance > 1e-6)
    throw ConfigError("schedule: merge_tolerance must lie in [0, 1e-6]");

  const double r = p.freq_ratio.value();
  const double k_amp = p.kick_strength;
  const double a_amp = p.amp_ratio * p.kick_strength;
  const std::int64_t n_prim = p.n_kicks;
  const bool exact = p.freq_ratio.exact();
  // ceil(r N): integers n with 0 <= n < rN.
  std::int64_t n_sec = 0;
  if (p.amp_ratio > 0) {
    if (exact)
      n_sec = (p.freq_ratio.num() * n_prim + p.freq_ratio.den() - 1) /
              p.freq_ratio.den();
    else
      n_sec = static_cast<std::int64_t>(
          std::ceil(r * static_cast<double>(n_prim)));
  }

  const std::int64_t den = exact ? p.freq_ratio.num() : 1;  // ticks per T1

  std::vector<RawEvent> raw;
  raw.reserve(static_cast<std::size_t>(n_prim + n_sec));
  for (std::int64_t k = 0; k < n_prim; ++k) {
    const double t = static_cast<double>(k);
    raw.push_back({exact ? k * den : 0, t, k_amp, SeriesTag::primary});
  }
  for (std::int64_t n = 0; n < n_sec; ++n) {
    std::int64_t tick = 0;
    double t;
    if (exact) {
      tick = n * p.freq_ratio.den();
      t = static_cast<double>(tick) / static_cast<double>(den);
    } else {
      t = static_cast<double>(n) / r;
    }
    raw.push_back({tick, t, a_amp, SeriesTag::secondary});
  }

  std::stable_sort(raw.begin(), raw.end(),
                   [exact](const RawEvent& a, const RawEvent& b) {
                     return exact ? a.tick < b.tick : a.time < b.time;
                   });

  KickTimeline tl;
  tl.params = p;
  tl.merge_tolerance = merge_tolerance;
  if (exact) tl.tick_den = den;

  // Cluster pass: fuse runs of events within merge_tolerance of the first
  // member; the fused event keeps the earliest time.
  for (std::size_t i = 0; i < raw.size();) {
    std::size_t j = i + 1;
    double amp = raw[i].amplitude;
    while (j < raw.size()) {
      const double dt = exact ? static_cast<double>(raw[j].tick - raw[i].tick) /
                                    static_cast<double>(den)
                              : raw[j].time - raw[i].time;
      if (dt > merge_tolerance) break;
      amp += raw[j].amplitude;
      ++j;
    }
    const SeriesTag tag = (j - i > 1) ? SeriesTag::merged : raw[i].tag;
    tl.events.push_back({raw[i].time, amp, tag});
    if (exact) tl.ticks.push_back(raw[i].tick);
    i = j;
  }

  if (p.pulse_frac > 0) {
    for (std::size_t i = 0; i + 1 < tl.events.size(); ++i) {
      const double gap = tl.gap(i);
      if (p.pulse_frac > gap)
        throw ConfigError(
            overlap_message(tl.events[i], tl.events[i + 1], gap, p.pulse_frac));
    }
  }
  return tl;
}

}  // namespace qkr
