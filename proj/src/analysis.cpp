#include "qkr/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qkr/errors.hpp"
#include "qkr/units.hpp"

namespace qkr {

std::string_view to_string(Shape s) {
  switch (s) {
    case Shape::exponential: return "exponential";
    case Shape::gaussian: return "gaussian";
    case Shape::intermediate: return "intermediate";
  }
  return "?";
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw RangeError("fit_line: need two equally sized samples of >= 2 points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  if (det == 0) throw RangeError("fit_line: degenerate abscissa");
  LinearFit f;
  f.slope = (n * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += e * e;
    ss_tot += (y[i] - ybar) * (y[i] - ybar);
  }
  f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

namespace {

struct TailFit {
  double slope = 0, intercept = 0, sse = 0;
};

// Plain least squares of ln P on x. Every usable bin counts equally: mass
// weighting would concentrate the fit on the innermost decade and erase
// the curvature contrast the verdict relies on.
TailFit tail_lsq(const std::vector<double>& x, const std::vector<double>& y) {
  const auto sw = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = sw * sxx - sx * sx;
  if (det == 0) throw ShapeError("fit_shape: degenerate tail abscissa");
  TailFit f;
  f.slope = (sw * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / sw;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (f.intercept + f.slope * x[i]);
    f.sse += e * e;
  }
  return f;
}

}  // namespace

ShapeFit fit_shape(const MomentumHistogram& hist, int core_exclusion) {
  if (core_exclusion < 0)
    throw ConfigError("fit_shape: core_exclusion must be >= 0");
  const double total = hist.total();
  if (!(total > 0)) throw ShapeError("fit_shape: empty histogram");
  const double peak = *std::max_element(hist.bins.begin(), hist.bins.end());
  const double lo = 1e-5 * peak;
  const double hi = 1e-1 * peak;
  const double floor = 1e-6 * total;  // scale-free: total is 1 when normalized

  std::vector<double> xa, xg, y;
  for (std::size_t i = 0; i < hist.bins.size(); ++i) {
    const double prob = hist.bins[i];
    const auto n = static_cast<double>(hist.n_min + static_cast<std::int64_t>(i));
    if (std::abs(n) < core_exclusion) continue;
    if (prob < floor || prob < lo || prob > hi) continue;
    xa.push_back(std::abs(n));
    xg.push_back(n * n);
    y.push_back(std::log(prob));
  }
  if (xa.size() < 20)
    throw ShapeError("fit_shape: only " + std::to_string(xa.size()) +
                     " usable tail bins (need >= 20)");

  const TailFit fe = tail_lsq(xa, y);
  const TailFit fg = tail_lsq(xg, y);
  if (fe.slope >= 0 || fg.slope >= 0)
    throw ShapeError("fit_shape: tail does not decay");

  ShapeFit out;
  out.exp_decay_length = -1.0 / fe.slope;
  out.gauss_sigma = std::sqrt(-0.5 / fg.slope);
  out.exp_sse = fe.sse;
  out.gauss_sse = fg.sse;
  out.exp_intercept = fe.intercept;
  out.gauss_intercept = fg.intercept;
  if (fg.sse > 2.0 * fe.sse)
    out.verdict = Shape::exponential;
  else if (fe.sse > 2.0 * fg.sse)
    out.verdict = Shape::gaussian;
  else
    out.verdict = Shape::intermediate;
  return out;
}

SweepCurve build_sweep(const ScaledParams& p, const std::vector<double>& a_grid,
                       const EnsembleConfig& cfg, Engine engine) {
  if (a_grid.empty() || a_grid.front() != 0)
    throw ConfigError("sweep: a-grid must start at 0");
  for (std::size_t i = 1; i < a_grid.size(); ++i)
    if (!(a_grid[i] > a_grid[i - 1]))
      throw ConfigError("sweep: a-grid must be strictly increasing");

  SweepCurve curve;
  curve.params = p;
  curve.params.amp_ratio = 0;
  for (double a : a_grid) {
    ScaledParams q = p;
    q.amp_ratio = a;
    const RunResult r = engine == Engine::quantum ? run_ensemble(q, cfg)
                                                  : run_classical(q, cfg);
    curve.points.push_back({a, scaled_amplitude(q), r.pi0, r.pi0_err});
  }
  const double norm = curve.points.front().pi0;
  if (!(norm > 0)) throw Error("sweep: vanishing pi0 at a = 0");
  curve.normalization = norm;
  for (SweepPoint& pt : curve.points) {
    pt.pi0 /= norm;
    pt.pi0_err /= norm;
  }
  return curve;
}

namespace {

double interp(const std::vector<double>& xs, const std::vector<double>& ys,
              double x) {
  // xs ascending, x within [xs.front(), xs.back()]
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  if (it == xs.begin()) return ys.front();
  if (it == xs.end()) return ys.back();
  const std::size_t j = static_cast<std::size_t>(it - xs.begin());
  const double t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
  return ys[j - 1] + t * (ys[j] - ys[j - 1]);
}

// Shared-grid interpolation and RMS across-curve standard deviation on one
// axis (extract(point) picks a or atilde).
template <class Extract>
double axis_spread(const std::vector<SweepCurve>& curves, Extract extract,
                   std::vector<double>& grid,
                   std::vector<std::vector<double>>& values) {
  double lo = 0, hi = 0;
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const auto& pts = curves[c].points;
    const double cmin = extract(pts.front());
    const double cmax = extract(pts.back());
    lo = c == 0 ? cmin : std::max(lo, cmin);
    hi = c == 0 ? cmax : std::min(hi, cmax);
  }
  if (!(hi > lo))
    throw RangeError("collapse: curves share no common support");

  grid.resize(kCollapseGridPoints);
  for (int g = 0; g < kCollapseGridPoints; ++g)
    grid[static_cast<std::size_t>(g)] =
        lo + (hi - lo) * g / (kCollapseGridPoints - 1);

  values.assign(curves.size(), {});
  for (std::size_t c = 0; c < curves.size(); ++c) {
    std::vector<double> xs, ys;
    for (const SweepPoint& pt : curves[c].points) {
      xs.push_back(extract(pt));
      ys.push_back(pt.pi0);
    }
    values[c].resize(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g)
      values[c][g] = interp(xs, ys, grid[g]);
  }

  double var_sum = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double mean = 0;
    for (std::size_t c = 0; c < curves.size(); ++c) mean += values[c][g];
    mean /= static_cast<double>(curves.size());
    double var = 0;
    for (std::size_t c = 0; c < curves.size(); ++c) {
      const double d = values[c][g] - mean;
      var += d * d;
    }
    var_sum += var / static_cast<double>(curves.size());
  }
  return std::sqrt(var_sum / static_cast<double>(grid.size()));
}

}  // namespace

CollapseReport collapse_test(const std::vector<SweepCurve>& curves,
                             double tolerance) {
  if (curves.size() < 2) throw RangeError("collapse: need >= 2 curves");
  for (const SweepCurve& c : curves)
    if (c.points.size() < 2)
      throw RangeError("collapse: every curve needs >= 2 points");
  if (!(tolerance > 0)) throw ConfigError("collapse: tolerance must be > 0");

  CollapseReport rep;
  rep.tolerance = tolerance;
  rep.spread_a = axis_spread(
      curves, [](const SweepPoint& p) { return p.a; }, rep.a_grid,
      rep.a_values);
  rep.spread_atilde = axis_spread(
      curves, [](const SweepPoint& p) { return p.atilde; }, rep.atilde_grid,
      rep.atilde_values);
  rep.collapsed = rep.spread_atilde <= tolerance;
  return rep;
}

}  // namespace qkr
