#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "qkr/errors.hpp"
#include "qkr/schedule.hpp"

using namespace qkr;

namespace {

ScaledParams base(std::int64_t n_kicks, double a, FreqRatio r) {
  ScaledParams p;
  p.kick_strength = 6.8;
  p.hbar_eff = 3.46;
  p.amp_ratio = a;
  p.freq_ratio = r;
  p.n_kicks = n_kicks;
  return p;
}

}  // namespace

TEST_CASE("direct enumeration, N=3, r=0.681, a=0.1") {
  const auto tl =
      build_timeline(base(3, 0.1, FreqRatio::from_rational(681, 1000)));
  // Primary: 0, 1, 2. Secondary: n/r for n = 0, 1, 2 (ceil(3r) = 3), the
  // n = 0 one fusing with the primary kick at t = 0.
  REQUIRE(tl.events.size() == 5);
  CHECK(tl.events[0].time == 0.0);
  CHECK(tl.events[0].amplitude == doctest::Approx(6.8 * 1.1).epsilon(1e-14));
  CHECK(tl.events[0].tag == SeriesTag::merged);
  CHECK(tl.events[1].time == 1.0);
  CHECK(tl.events[1].amplitude == 6.8);
  CHECK(tl.events[1].tag == SeriesTag::primary);
  CHECK(tl.events[2].time == doctest::Approx(1.4684287812).epsilon(1e-10));
  CHECK(tl.events[2].amplitude == doctest::Approx(0.68).epsilon(1e-14));
  CHECK(tl.events[2].tag == SeriesTag::secondary);
  CHECK(tl.events[3].time == 2.0);
  CHECK(tl.events[4].time == doctest::Approx(2.9368575624).epsilon(1e-10));
}

TEST_CASE("a = 0 drops the secondary series") {
  const auto tl =
      build_timeline(base(3, 0.0, FreqRatio::from_rational(681, 1000)));
  REQUIRE(tl.events.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(tl.events[i].time == static_cast<double>(i));
    CHECK(tl.events[i].amplitude == 6.8);
    CHECK(tl.events[i].tag == SeriesTag::primary);
  }
}

TEST_CASE("N=200, r=681/1000: only the t=0 event is merged") {
  const auto tl =
      build_timeline(base(200, 0.2, FreqRatio::from_rational(681, 1000)));
  // Secondary count: ceil(0.681*200) = ceil(136.2) = 137; one coincidence.
  REQUIRE(tl.events.size() == 200 + 137 - 1);
  int merged = 0;
  for (const auto& e : tl.events) merged += e.tag == SeriesTag::merged;
  CHECK(merged == 1);
  CHECK(tl.events[0].time == 0.0);
  CHECK(tl.events[0].tag == SeriesTag::merged);
}

TEST_CASE("secondary count is ceil(rN)") {
  // r*N integral: r = 1/2, N = 10 -> exactly rN = 5 secondary kicks
  // (n = 0..4; the upper limit is exclusive for integer rN).
  const auto tl = build_timeline(base(10, 0.5, FreqRatio::from_rational(1, 2)));
  std::int64_t secondary = 0;
  double total = 0;
  for (const auto& e : tl.events) {
    total += e.amplitude;
    if (e.tag != SeriesTag::primary) ++secondary;  // merged carries one too
  }
  CHECK(secondary == 5);
  CHECK(total == doctest::Approx(6.8 * 10 + 0.5 * 6.8 * 5).epsilon(1e-13));
}

TEST_CASE("total amplitude is conserved by merging") {
  for (double a : {0.0, 0.1, 1.0}) {
    const auto tl =
        build_timeline(base(50, a, FreqRatio::from_rational(681, 1000)));
    double total = 0;
    for (const auto& e : tl.events) total += e.amplitude;
    const double expected =
        6.8 * 50 + a * 6.8 * std::ceil(0.681 * 50);
    CHECK(total == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("r = 1 degeneracy collapses to N events of K(1+a)") {
  const auto tl = build_timeline(base(7, 0.3, FreqRatio::from_rational(1, 1)));
  REQUIRE(tl.events.size() == 7);
  for (const auto& e : tl.events) {
    CHECK(e.amplitude == doctest::Approx(6.8 * 1.3).epsilon(1e-14));
    CHECK(e.tag == SeriesTag::merged);
  }
}

TEST_CASE("event times are strictly increasing and gaps exceed the tolerance") {
  const auto tl =
      build_timeline(base(500, 0.25, FreqRatio::from_rational(681, 1000)));
  for (std::size_t i = 1; i < tl.events.size(); ++i)
    REQUIRE(tl.events[i].time - tl.events[i - 1].time >
            kMergeToleranceDefault);
}

TEST_CASE("bit-identical timelines for identical inputs") {
  const auto a =
      build_timeline(base(321, 0.17, FreqRatio::from_rational(681, 1000)));
  const auto b =
      build_timeline(base(321, 0.17, FreqRatio::from_rational(681, 1000)));
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    REQUIRE(a.events[i].time == b.events[i].time);
    REQUIRE(a.events[i].amplitude == b.events[i].amplitude);
    REQUIRE(a.events[i].tag == b.events[i].tag);
  }
}

TEST_CASE("exact rational r keeps times and gaps exact over long horizons") {
  const auto tl =
      build_timeline(base(1000, 0.25, FreqRatio::from_rational(681, 1000)));
  REQUIRE(tl.ticks.size() == tl.events.size());
  int unit_gaps = 0;
  for (std::size_t i = 0; i + 1 < tl.events.size(); ++i) {
    // A tick difference of one primary period must give a gap of exactly 1,
    // with no accumulated rounding even at the end of the horizon.
    if (tl.ticks[i + 1] - tl.ticks[i] == tl.tick_den) {
      REQUIRE(tl.gap(i) == 1.0);
      ++unit_gaps;
    }
  }
  CHECK(unit_gaps > 0);
  for (std::size_t i = 0; i < tl.events.size(); ++i)
    if (tl.events[i].tag != SeriesTag::secondary)
      REQUIRE(tl.events[i].time ==
              static_cast<double>(std::llround(tl.events[i].time)));
}

TEST_CASE("floating-point r still works") {
  const auto tl = build_timeline(base(40, 0.2, FreqRatio::from_double(0.681)));
  const auto exact =
      build_timeline(base(40, 0.2, FreqRatio::from_rational(681, 1000)));
  REQUIRE(tl.events.size() == exact.events.size());
  for (std::size_t i = 0; i < tl.events.size(); ++i)
    CHECK(tl.events[i].time ==
          doctest::Approx(exact.events[i].time).epsilon(1e-12));
}

TEST_CASE("overlapping finite pulses are rejected with both times named") {
  ScaledParams p = base(3, 0.1, FreqRatio::from_rational(681, 1000));
  // Gap between t = 1.4684... and t = 2 is ~0.53; a pulse of 0.6 periods
  // cannot fit. ScaledParams::validate already rejects pulse_frac >= 1/(2r),
  // so probe the timeline check directly with a gap-straddling value.
  p.freq_ratio = FreqRatio::from_rational(5, 7);
  p.pulse_frac = 0.3;
  p.n_kicks = 8;
  try {
    build_timeline(p);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("pulse") != std::string::npos);
  }
}

TEST_CASE("merge tolerance domain is checked") {
  const ScaledParams p = base(3, 0.1, FreqRatio::from_rational(681, 1000));
  CHECK_THROWS_AS(build_timeline(p, -1e-12), ConfigError);
  CHECK_THROWS_AS(build_timeline(p, 1e-3), ConfigError);
  CHECK_NOTHROW(build_timeline(p, 0.0));
}

TEST_CASE("event_at_or_after walks boundaries without skipping") {
  const auto tl =
      build_timeline(base(6, 0.4, FreqRatio::from_rational(681, 1000)));
  std::size_t i = 0;
  // All events with time < 2 precede boundary t = 2; the event at exactly
  // t = 2 counts as at-or-after.
  while (i < tl.events.size() && !tl.event_at_or_after(i, 2.0)) ++i;
  REQUIRE(i < tl.events.size());
  CHECK(tl.events[i].time == 2.0);
}
