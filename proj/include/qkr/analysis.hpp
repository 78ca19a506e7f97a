#pragma once

#include <string_view>
#include <vector>

#include "qkr/classical.hpp"
#include "qkr/ensemble.hpp"

namespace qkr {

inline constexpr int kCoreExclusionDefault = 4;
inline constexpr double kCollapseToleranceDefault = 0.1;
inline constexpr int kCollapseGridPoints = 101;

struct SweepPoint {
  double a = 0;
  double atilde = 0;  // a K^2 / hbar_eff^2
  double pi0 = 0;     // normalized: pi0(a=0) == 1
  double pi0_err = 0;
};

struct SweepCurve {
  std::vector<SweepPoint> points;
  ScaledParams params;        // amp_ratio cleared; the grid supplies a
  double normalization = 0;   // raw pi0 at a = 0
};

enum class Shape { exponential, gaussian, intermediate };
std::string_view to_string(Shape s);

struct ShapeFit {
  double exp_decay_length = 0;  // xi of Pi ~ exp(-|p| / xi)
  double gauss_sigma = 0;       // sigma of Pi ~ exp(-p^2 / (2 sigma^2))
  double exp_sse = 0;           // SSE of the ln-fit vs |p|
  double gauss_sse = 0;         // SSE of the ln-fit vs p^2
  double exp_intercept = 0;     // fitted ln Pi at p = 0, for curve dumps
  double gauss_intercept = 0;
  Shape verdict = Shape::intermediate;
};

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
};

struct CollapseReport {
  double spread_a = 0;       // RMS inter-curve deviation vs raw a
  double spread_atilde = 0;  // same vs atilde
  double tolerance = 0;
  bool collapsed = false;
  std::vector<double> a_grid, atilde_grid;  // shared interpolation grids
  std::vector<std::vector<double>> a_values, atilde_values;  // [curve][grid]
};

// Plain least squares of y on x with coefficient of determination.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Tail-shape classification: least squares of ln Pi against |n| and
// against n^2 over bins whose mass lies within [1e-5, 1e-1] of the peak
// (every usable bin weighted equally, the way a log-scale plot is read),
// dropping |n| < core_exclusion around zero.
// Verdict: exponential if gauss_sse/exp_sse > 2, gaussian if the inverse
// ratio > 2, intermediate otherwise. Throws ShapeError when fewer than 20
// usable bins remain or the tail does not decay.
ShapeFit fit_shape(const MomentumHistogram& hist,
                   int core_exclusion = kCoreExclusionDefault);

// Pi0(a) curve over the grid (which must start at 0, ascending), normalized
// by the a = 0 point. One engine run per grid point, same seed each.
SweepCurve build_sweep(const ScaledParams& p, const std::vector<double>& a_grid,
                       const EnsembleConfig& cfg,
                       Engine engine = Engine::quantum);

// Interpolates every curve onto shared uniform grids over the common
// support of the raw-a and atilde axes and takes the RMS (over grid points)
// of the across-curve standard deviation. collapsed <=> the atilde spread
// is within tolerance.
CollapseReport collapse_test(const std::vector<SweepCurve>& curves,
                             double tolerance = kCollapseToleranceDefault);

}  // namespace qkr
