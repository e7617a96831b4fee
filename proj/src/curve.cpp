#include "srvf/curve.hpp"

#include <cmath>

#include "srvf/errors.hpp"

namespace srvf {

namespace {
constexpr double kDerivativeFloor = 1e-10;
}

double inner_product(const Srvf& a, const Srvf& b) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    s += a.weight(i) * a.values.col(i).dot(b.values.col(i));
  return s;
}

double norm(const Srvf& a) { return std::sqrt(inner_product(a, a)); }

Srvf renormalized(Srvf q) {
  const double n = norm(q);
  if (n > 0.0) q.values /= n;
  return q;
}

double curve_length(const PlanarCurve& c) {
  const Eigen::Index m = c.size();
  double len = 0.0;
  for (Eigen::Index i = 0; i + 1 < m; ++i)
    len += (c.points.col(i + 1) - c.points.col(i)).norm();
  if (c.closed && m > 1) len += (c.points.col(0) - c.points.col(m - 1)).norm();
  return len;
}

PlanarCurve normalize(const PlanarCurve& c) {
  if (c.size() < 3) throw DataError("normalize: curve has fewer than 3 points");
  const double len = curve_length(c);
  if (len <= 0.0)
    throw DataError("normalize: curve '" + c.id + "' has zero length");
  PlanarCurve out = c;
  const Eigen::Vector2d centroid = c.points.rowwise().mean();
  out.points = (c.points.colwise() - centroid) / len;
  return out;
}

PlanarCurve resample_arclength(const PlanarCurve& c, int m) {
  if (m < 3) throw UsageError("resample_arclength: m must be at least 3");
  const Eigen::Index n = c.size();
  if (n < 3)
    throw DataError("resample_arclength: curve has fewer than 3 points");

  // Segment endpoints of the piecewise-linear interpolant, including the
  // closing segment when the curve is closed.
  const Eigen::Index nseg = c.closed ? n : n - 1;
  std::vector<double> cum(static_cast<size_t>(nseg) + 1, 0.0);
  for (Eigen::Index i = 0; i < nseg; ++i) {
    const Eigen::Vector2d a = c.points.col(i);
    const Eigen::Vector2d b = c.points.col((i + 1) % n);
    cum[static_cast<size_t>(i) + 1] =
        cum[static_cast<size_t>(i)] + (b - a).norm();
  }
  const double total = cum.back();
  if (total <= 0.0)
    throw DataError("resample_arclength: curve '" + c.id + "' has zero length");

  PlanarCurve out;
  out.closed = c.closed;
  out.label = c.label;
  out.id = c.id;
  out.points.resize(2, m);

  const double spacing = c.closed ? total / m : total / (m - 1);
  Eigen::Index seg = 0;
  for (int k = 0; k < m; ++k) {
    double s = spacing * k;
    if (!c.closed && k == m - 1) s = total;  // pin the far endpoint
    while (seg + 1 < nseg && cum[static_cast<size_t>(seg) + 1] < s) ++seg;
    const double seg_len =
        cum[static_cast<size_t>(seg) + 1] - cum[static_cast<size_t>(seg)];
    const double t =
        seg_len > 0.0 ? (s - cum[static_cast<size_t>(seg)]) / seg_len : 0.0;
    const Eigen::Vector2d a = c.points.col(seg);
    const Eigen::Vector2d b = c.points.col((seg + 1) % n);
    out.points.col(k) = a + t * (b - a);
  }
  return out;
}

Srvf to_srvf(const PlanarCurve& c) {
  const Eigen::Index m = c.size();
  if (m < 3) throw DataError("to_srvf: curve has fewer than 3 points");

  Srvf q;
  q.closed = c.closed;
  q.values.resize(2, m);
  const double h = c.closed ? 1.0 / m : 1.0 / (m - 1);

  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::Vector2d deriv;
    if (c.closed) {
      deriv = (c.points.col((i + 1) % m) - c.points.col((i + m - 1) % m)) /
              (2.0 * h);
    } else if (i == 0) {
      deriv = (c.points.col(1) - c.points.col(0)) / h;
    } else if (i == m - 1) {
      deriv = (c.points.col(m - 1) - c.points.col(m - 2)) / h;
    } else {
      deriv = (c.points.col(i + 1) - c.points.col(i - 1)) / (2.0 * h);
    }
    const double speed = deriv.norm();
    q.values.col(i) = speed < kDerivativeFloor
                          ? Eigen::Vector2d::Zero()
                          : Eigen::Vector2d(deriv / std::sqrt(speed));
  }
  return renormalized(std::move(q));
}

PlanarCurve from_srvf(const Srvf& q) {
  const Eigen::Index m = q.size();
  PlanarCurve c;
  c.closed = q.closed;
  c.points.resize(2, m);
  const double h = q.grid_step();

  Eigen::Vector2d pos = Eigen::Vector2d::Zero();
  c.points.col(0) = pos;
  for (Eigen::Index i = 1; i < m; ++i) {
    const Eigen::Vector2d ga = q.values.col(i - 1) * q.values.col(i - 1).norm();
    const Eigen::Vector2d gb = q.values.col(i) * q.values.col(i).norm();
    pos += 0.5 * h * (ga + gb);
    c.points.col(i) = pos;
  }
  return c;
}

}  // namespace srvf
