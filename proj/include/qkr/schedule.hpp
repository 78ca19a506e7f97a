#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "qkr/units.hpp"

namespace qkr {

enum class SeriesTag { primary, secondary, merged };

std::string_view to_string(SeriesTag tag);

struct KickEvent {
  double time = 0;       // units of T1
  double amplitude = 0;  // dimensionless; K, aK, or a merged sum
  SeriesTag tag = SeriesTag::primary;
};

// Time-ordered merged kick schedule of the two series.
//
// When the frequency ratio is an exact rational num/den, every event time is
// an integer multiple of 1/num ("ticks"): primary kicks sit at k*num ticks,
// secondary ones at n*den. Gaps are then computed tick-wise, so equal gaps
// are bit-identical doubles, which the propagator exploits to cache drift
// phase tables (the merged schedule has only a handful of distinct gaps).
struct KickTimeline {
  std::vector<KickEvent> events;
  ScaledParams params;
  double merge_tolerance = 0;

  std::vector<std::int64_t> ticks;  // empty when freq_ratio is inexact
  std::int64_t tick_den = 0;        // ticks per T1; 0 when inexact

  // Gap between events i and i+1, exact where ticks are available.
  double gap(std::size_t i) const;

  // events[i].time >= t for integer t, tick-exact when possible. Used to
  // decide whether a primary-period boundary falls before event i.
  bool event_at_or_after(std::size_t i, std::int64_t t) const;
};

inline constexpr double kMergeToleranceDefault = 1e-9;

// Merged timeline: primary kicks of amplitude K at t = 0..N-1, secondary
// kicks of amplitude a*K at t = n/r for 0 <= n < rN. Events closer than
// merge_tolerance fuse into one with summed amplitude (the kick operators
// commute). With a = 0 the secondary series is omitted.
KickTimeline build_timeline(const ScaledParams& p,
                            double merge_tolerance = kMergeToleranceDefault);

}  // namespace qkr
