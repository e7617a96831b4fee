#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace srvf {

/// Ordered 2-D point samples of an outline. Closed curves do not duplicate
/// the start point; the closing segment is implied.
struct PlanarCurve {
  Eigen::Matrix2Xd points;  // column i = i-th sample
  bool closed = false;
  std::optional<int> label;
  std::string id;

  Eigen::Index size() const { return points.cols(); }
};

/// Discretized square-root velocity function on a uniform grid over [0,1].
/// Open curves sample t_i = i/(m-1); closed curves t_i = i/m (no wrap
/// duplicate). Unit L2 norm under the curve's quadrature rule.
struct Srvf {
  Eigen::Matrix2Xd values;
  bool closed = false;

  Eigen::Index size() const { return values.cols(); }
  double grid_step() const {
    return closed ? 1.0 / static_cast<double>(size())
                  : 1.0 / static_cast<double>(size() - 1);
  }
  // Trapezoid weight of sample i (rectangle rule for the periodic case).
  double weight(Eigen::Index i) const {
    const double h = grid_step();
    if (closed) return h;
    return (i == 0 || i == size() - 1) ? 0.5 * h : h;
  }
};

double inner_product(const Srvf& a, const Srvf& b);
double norm(const Srvf& a);
Srvf renormalized(Srvf q);

/// Piecewise-linear length, including the closing segment for closed curves.
double curve_length(const PlanarCurve& c);

/// Centroid to the origin, total arc length to one. Point order preserved.
PlanarCurve normalize(const PlanarCurve& c);

/// m points at equal arc-length spacing along the piecewise-linear
/// interpolant. Open curves keep their endpoints; closed curves distribute
/// m points over the full cycle starting at the original start point.
PlanarCurve resample_arclength(const PlanarCurve& c, int m);

/// Eq. q = beta' / sqrt(|beta'|) with finite-difference derivatives,
/// renormalized to unit norm. Expects a normalized, uniformly resampled
/// curve.
Srvf to_srvf(const PlanarCurve& c);

/// Cumulative integral of q|q| from the origin. Translation is not
/// recoverable; the start point is pinned at (0,0).
PlanarCurve from_srvf(const Srvf& q);

}  // namespace srvf
