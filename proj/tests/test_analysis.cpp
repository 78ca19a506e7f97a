#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "qkr/analysis.hpp"
#include "qkr/errors.hpp"

using namespace qkr;

namespace {

ScaledParams params(double k, double hb, double a, std::int64_t n) {
  ScaledParams p;
  p.kick_strength = k;
  p.hbar_eff = hb;
  p.amp_ratio = a;
  p.freq_ratio = FreqRatio::from_rational(681, 1000);
  p.n_kicks = n;
  return p;
}

// Histogram over classes [-half, half] sampling prob(n), then normalized.
MomentumHistogram synthetic_hist(std::int64_t half, double (*prob)(double)) {
  MomentumHistogram h;
  h.n_min = -half;
  h.n_traj = 1;
  h.bins.resize(static_cast<std::size_t>(2 * half + 1));
  double total = 0;
  for (std::size_t i = 0; i < h.bins.size(); ++i) {
    const double n = static_cast<double>(h.n_min + static_cast<std::int64_t>(i));
    h.bins[i] = prob(n);
    total += h.bins[i];
  }
  for (double& b : h.bins) b /= total;
  return h;
}

SweepCurve synthetic_curve(double k, double hb, const std::vector<double>& grid,
                           double (*master)(double)) {
  SweepCurve c;
  c.params = params(k, hb, 0.0, 35);
  c.normalization = 1.0;
  const double factor = k * k / (hb * hb);
  for (double a : grid) {
    SweepPoint pt;
    pt.a = a;
    pt.atilde = a * factor;
    pt.pi0 = master(pt.atilde);
    pt.pi0_err = 0.01;
    c.points.push_back(pt);
  }
  return c;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1);
  return g;
}

}  // namespace

TEST_CASE("fit_line recovers an exact line") {
  const std::vector<double> x = {0, 1, 2, 3, 4, 5};
  std::vector<double> y;
  for (double xi : x) y.push_back(3.0 * xi + 2.0);
  const LinearFit f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(f.intercept == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("fit_line on noisy data and guard rails") {
  // Symmetric residuals leave the slope exact and drop r2 below 1.
  const std::vector<double> x = {0, 1, 2, 3};
  const std::vector<double> y = {0.1, 0.9, 2.1, 2.9};
  const LinearFit f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(0.96).epsilon(1e-12));
  CHECK(f.r2 > 0.99);
  CHECK(f.r2 < 1.0);

  CHECK_THROWS_AS(fit_line({1.0}, {2.0}), RangeError);
  CHECK_THROWS_AS(fit_line({1.0, 2.0}, {1.0, 2.0, 3.0}), RangeError);
  CHECK_THROWS_AS(fit_line({2.0, 2.0, 2.0}, {1.0, 2.0, 3.0}), RangeError);
}

TEST_CASE("fit_shape recovers a synthetic exponential") {
  const MomentumHistogram h = synthetic_hist(
      400, [](double n) { return std::exp(-std::abs(n) / 5.0); });
  const ShapeFit f = fit_shape(h);
  CHECK(f.verdict == Shape::exponential);
  CHECK(f.exp_decay_length == doctest::Approx(5.0).epsilon(0.1 / 5.0));
  CHECK(f.gauss_sse / f.exp_sse > 2.0);
}

TEST_CASE("fit_shape recovers a synthetic gaussian") {
  const MomentumHistogram h = synthetic_hist(
      400, [](double n) { return std::exp(-n * n / (2.0 * 144.0)); });
  const ShapeFit f = fit_shape(h);
  CHECK(f.verdict == Shape::gaussian);
  CHECK(f.gauss_sigma == doctest::Approx(12.0).epsilon(0.2 / 12.0));
  CHECK(f.exp_sse / f.gauss_sse > 2.0);
}

TEST_CASE("fit_shape ignores overall normalization") {
  MomentumHistogram h = synthetic_hist(
      400, [](double n) { return std::exp(-std::abs(n) / 5.0); });
  const ShapeFit base = fit_shape(h);
  for (double& b : h.bins) b *= 7.3;  // no longer sums to 1
  const ShapeFit scaled = fit_shape(h);
  CHECK(scaled.verdict == base.verdict);
  CHECK(scaled.exp_decay_length ==
        doctest::Approx(base.exp_decay_length).epsilon(1e-12));
  CHECK(scaled.gauss_sigma == doctest::Approx(base.gauss_sigma).epsilon(1e-12));
  CHECK(scaled.exp_sse == doctest::Approx(base.exp_sse).epsilon(1e-9));
}

TEST_CASE("fit_shape error paths") {
  // Too narrow: everything inside the core exclusion or below the floor.
  const MomentumHistogram narrow = synthetic_hist(
      6, [](double n) { return std::exp(-std::abs(n) / 0.5); });
  CHECK_THROWS_AS(fit_shape(narrow), ShapeError);

  // A rising tail is not a momentum distribution of this experiment.
  const MomentumHistogram rising = synthetic_hist(
      400, [](double n) { return 1e-4 + n * n / 1.6e5; });
  CHECK_THROWS_AS(fit_shape(rising), ShapeError);

  MomentumHistogram empty;
  empty.bins.assign(41, 0.0);
  empty.n_min = -20;
  CHECK_THROWS_AS(fit_shape(empty), ShapeError);

  const MomentumHistogram fine = synthetic_hist(
      400, [](double n) { return std::exp(-std::abs(n) / 5.0); });
  CHECK_THROWS_AS(fit_shape(fine, -1), ConfigError);
}

TEST_CASE("fit_shape on simulated runs tracks the crossover") {
  EnsembleConfig cfg;
  cfg.n_traj = 300;
  cfg.seed = 40;
  cfg.init_sigma = 1.95;

  // Ideal dynamical localization: frozen exponential profile.
  const RunResult loc = run_ensemble(params(6.8, 3.46, 0.0, 35), cfg);
  const ShapeFit f_loc = fit_shape(loc.hist);
  CHECK(f_loc.verdict == Shape::exponential);
  CHECK(f_loc.exp_decay_length > 0);

  // Same hbar_eff with the second series on: partially delocalized. Over
  // the four-decade fit window the finite-time wings steepen past a pure
  // exponential, so the verdict sits at exponential-or-intermediate --
  // never gaussian -- and the exponential model keeps getting closer as
  // hbar_eff grows.
  const RunResult mid = run_ensemble(params(6.8, 3.46, 0.25, 35), cfg);
  const ShapeFit f_mid = fit_shape(mid.hist);
  CHECK(f_mid.verdict != Shape::gaussian);

  // Small effective Planck constant: still spreading, gaussian profile.
  const RunResult dif = run_ensemble(params(6.8, 1.44, 0.25, 200), cfg);
  const ShapeFit f_dif = fit_shape(dif.hist);
  CHECK(f_dif.verdict == Shape::gaussian);
  CHECK(f_dif.gauss_sigma > f_mid.gauss_sigma);

  // The sse contest moves monotonically from exponential-favoring to
  // gaussian-favoring across the three regimes.
  const double r_loc = f_loc.gauss_sse / f_loc.exp_sse;
  const double r_mid = f_mid.gauss_sse / f_mid.exp_sse;
  const double r_dif = f_dif.gauss_sse / f_dif.exp_sse;
  CHECK(r_loc > r_mid);
  CHECK(r_mid > r_dif);
}

TEST_CASE("build_sweep anchors the normalization at a = 0") {
  const ScaledParams p = params(6.8, 3.46, 0.0, 20);
  EnsembleConfig cfg;
  cfg.n_traj = 8;
  cfg.seed = 3;
  cfg.init_sigma = 1.95;

  const SweepCurve single = build_sweep(p, {0.0}, cfg);
  REQUIRE(single.points.size() == 1);
  CHECK(single.points[0].a == 0.0);
  CHECK(single.points[0].atilde == 0.0);
  CHECK(single.points[0].pi0 == 1.0);  // x / x: exact
  CHECK(single.normalization > 0.0);
  CHECK(single.params.amp_ratio == 0.0);

  const SweepCurve c = build_sweep(p, {0.0, 0.1, 0.25}, cfg);
  REQUIRE(c.points.size() == 3);
  CHECK(c.points[0].pi0 == 1.0);
  ScaledParams at = p;
  at.amp_ratio = 0.1;
  CHECK(c.points[1].atilde == scaled_amplitude(at));
  at.amp_ratio = 0.25;
  CHECK(c.points[2].atilde == scaled_amplitude(at));
  for (const SweepPoint& pt : c.points) {
    CHECK(pt.pi0 > 0.0);
    CHECK(pt.pi0_err >= 0.0);
  }
}

TEST_CASE("build_sweep rejects malformed grids") {
  const ScaledParams p = params(6.8, 3.46, 0.0, 5);
  EnsembleConfig cfg;
  cfg.seed = 1;
  CHECK_THROWS_AS(build_sweep(p, {}, cfg), ConfigError);
  CHECK_THROWS_AS(build_sweep(p, {0.1, 0.2}, cfg), ConfigError);
  CHECK_THROWS_AS(build_sweep(p, {0.0, 0.2, 0.2}, cfg), ConfigError);
  CHECK_THROWS_AS(build_sweep(p, {0.0, 0.2, 0.1}, cfg), ConfigError);
}

TEST_CASE("build_sweep works for the classical engine") {
  const ScaledParams p = params(6.8, 3.46, 0.0, 30);
  EnsembleConfig cfg;
  cfg.n_traj = 500;
  cfg.seed = 14;
  cfg.init_sigma = 1.95;
  const SweepCurve c = build_sweep(p, {0.0, 0.25}, cfg, Engine::classical);
  CHECK(c.points[0].pi0 == 1.0);
  CHECK(c.points[1].pi0 > 0.0);
}

TEST_CASE("raw curves of far-apart rows are visibly distinct") {
  // Same kick strength, very different hbar_eff: the raw Pi0(a) decays
  // must separate well beyond their error bars before any rescaling.
  EnsembleConfig cfg;
  cfg.n_traj = 100;
  cfg.seed = 9;
  cfg.init_sigma = 1.95;
  const std::vector<double> grid = {0.0, 0.0625, 0.125, 0.1875, 0.25};
  const SweepCurve slow = build_sweep(params(6.8, 3.46, 0.0, 35), grid, cfg);
  const SweepCurve fast = build_sweep(params(6.8, 1.44, 0.0, 200), grid, cfg);
  double rms = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = slow.points[i].pi0 - fast.points[i].pi0;
    rms += d * d;
  }
  rms = std::sqrt(rms / static_cast<double>(grid.size()));
  CHECK(rms > 0.15);
}

TEST_CASE("collapse_test: identical curves collapse exactly") {
  const SweepCurve c = synthetic_curve(6.8, 3.46, linspace(0, 0.25, 11),
                                       [](double x) { return std::exp(-x); });
  const CollapseReport r = collapse_test({c, c});
  CHECK(r.spread_a == 0.0);
  CHECK(r.spread_atilde == 0.0);
  CHECK(r.collapsed);
  CHECK(r.tolerance == kCollapseToleranceDefault);
  CHECK(r.a_grid.size() == static_cast<std::size_t>(kCollapseGridPoints));
  CHECK(r.atilde_grid.size() == r.a_grid.size());
  REQUIRE(r.a_values.size() == 2);
  REQUIRE(r.atilde_values.size() == 2);
  CHECK(r.a_values[0].size() == r.a_grid.size());
}

TEST_CASE("collapse_test: a shared master curve collapses in atilde only") {
  // Both curves sample pi0 = exp(-atilde) on the same a-grid but with very
  // different scale factors K^2 / hbar^2; vs raw a they disagree wildly,
  // vs atilde only the interpolation error survives.
  const auto master = [](double x) { return std::exp(-x); };
  const SweepCurve c1 =
      synthetic_curve(6.8, 3.46, linspace(0, 0.25, 11), master);
  const SweepCurve c2 =
      synthetic_curve(6.8, 1.44, linspace(0, 0.25, 11), master);
  const CollapseReport r = collapse_test({c1, c2});
  CHECK(r.spread_atilde < 0.05);
  CHECK(r.spread_a > 0.2);
  CHECK(r.spread_a > 4.0 * r.spread_atilde);
  CHECK(r.collapsed);
}

TEST_CASE("collapse_test: permutation symmetry") {
  const auto master = [](double x) { return 1.0 / (1.0 + x); };
  const SweepCurve c1 =
      synthetic_curve(6.8, 3.46, linspace(0, 0.25, 11), master);
  const SweepCurve c2 =
      synthetic_curve(6.8, 2.88, linspace(0, 0.25, 9), master);
  const SweepCurve c3 =
      synthetic_curve(4.5, 3.46, linspace(0, 0.25, 7), master);
  const CollapseReport ab = collapse_test({c1, c2, c3});
  const CollapseReport ba = collapse_test({c3, c1, c2});
  CHECK(ab.spread_a == doctest::Approx(ba.spread_a).epsilon(1e-12));
  CHECK(ab.spread_atilde == doctest::Approx(ba.spread_atilde).epsilon(1e-12));
  CHECK(ab.collapsed == ba.collapsed);
}

TEST_CASE("collapse_test: rescaling identity") {
  // Rewriting every curve's a-axis in units of its own K^2 / hbar^2 (so
  // that a == atilde) must reproduce spread_atilde on the raw-a axis.
  const auto master = [](double x) { return std::exp(-0.7 * x); };
  std::vector<SweepCurve> curves = {
      synthetic_curve(6.8, 3.46, linspace(0, 0.25, 11), master),
      synthetic_curve(6.8, 1.92, linspace(0, 0.25, 8), master)};
  std::vector<SweepCurve> rescaled = curves;
  for (SweepCurve& c : rescaled) {
    c.params.kick_strength = 1.0;
    c.params.hbar_eff = 1.0;
    for (SweepPoint& pt : c.points) pt.a = pt.atilde;  // now factor == 1
  }
  const CollapseReport raw = collapse_test(curves);
  const CollapseReport scaled = collapse_test(rescaled);
  CHECK(scaled.spread_a == raw.spread_atilde);
  CHECK(scaled.spread_atilde == raw.spread_atilde);
}

TEST_CASE("collapse_test: tolerance sets the verdict") {
  const SweepCurve c1 = synthetic_curve(6.8, 3.46, linspace(0, 0.25, 11),
                                        [](double x) { return std::exp(-x); });
  const SweepCurve c2 =
      synthetic_curve(6.8, 3.46, linspace(0, 0.25, 11),
                      [](double x) { return 0.9 * std::exp(-x); });
  const CollapseReport loose = collapse_test({c1, c2}, 1.0);
  REQUIRE(loose.spread_atilde > 0.0);
  CHECK(loose.collapsed);
  const CollapseReport tight =
      collapse_test({c1, c2}, loose.spread_atilde * 0.5);
  CHECK_FALSE(tight.collapsed);
  const CollapseReport at = collapse_test({c1, c2}, loose.spread_atilde);
  CHECK(at.collapsed);  // boundary counts as collapsed
}

TEST_CASE("collapse_test guards") {
  const auto master = [](double x) { return std::exp(-x); };
  const SweepCurve c1 =
      synthetic_curve(6.8, 3.46, linspace(0, 0.25, 11), master);
  CHECK_THROWS_AS(collapse_test({c1}), RangeError);
  CHECK_THROWS_AS(collapse_test({c1, c1}, 0.0), ConfigError);
  CHECK_THROWS_AS(collapse_test({c1, c1}, -1.0), ConfigError);

  SweepCurve stub = c1;
  stub.points.resize(1);
  CHECK_THROWS_AS(collapse_test({c1, stub}), RangeError);

  // Disjoint atilde supports: translate the second curve's a-axis.
  SweepCurve far = c1;
  for (SweepPoint& pt : far.points) {
    pt.a += 1.0;
    pt.atilde = pt.a * 6.8 * 6.8 / (3.46 * 3.46);
  }
  CHECK_THROWS_AS(collapse_test({c1, far}), RangeError);
}
