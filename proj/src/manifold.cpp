#include "srvf/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "srvf/errors.hpp"

namespace srvf {
namespace manifold {

namespace {

double tangent_inner(const Srvf& base, const Eigen::Matrix2Xd& a,
                     const Eigen::Matrix2Xd& b) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < base.size(); ++i)
    s += base.weight(i) * a.col(i).dot(b.col(i));
  return s;
}

// Deterministic hash of the basis contents, used to tag coordinates.
std::uint64_t fnv1a(const double* data, size_t n, std::uint64_t h = 1469598103934665603ull) {
  const auto* bytes = reinterpret_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n * sizeof(double); ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  return h;
}

double sum_sq_distances(const std::vector<reg::Alignment>& regs) {
  double s = 0.0;
  for (const auto& a : regs) s += a.distance * a.distance;
  return s;
}

}  // namespace

double TangentVector::norm() const {
  return std::sqrt(tangent_inner(base, values, values));
}

Srvf exp_map(const Srvf& p, const TangentVector& v) {
  const double nv = v.norm();
  if (nv < 1e-12) return p;
  Srvf out = p;
  out.values = std::cos(nv) * p.values + (std::sin(nv) / nv) * v.values;
  return out;
}

TangentVector log_map(const Srvf& p, const Srvf& q) {
  const double ip = std::clamp(inner_product(p, q), -1.0, 1.0);
  const double theta = std::acos(ip);
  if (theta >= std::numbers::pi - 1e-6)
    throw NumericalError("log_map: antipodal pair");
  TangentVector v;
  v.base = p;
  if (theta < 1e-12) {
    v.values = Eigen::Matrix2Xd::Zero(2, p.size());
  } else {
    v.values = (theta / std::sin(theta)) * (q.values - ip * p.values);
  }
  return v;
}

KarcherMean karcher_mean(const std::vector<Srvf>& shapes,
                         const MeanConfig& config) {
  const auto n = static_cast<int>(shapes.size());
  if (n < 2) throw UsageError("karcher_mean: need at least 2 shapes");
  for (const auto& q : shapes)
    if (q.size() != shapes[0].size() || q.closed != shapes[0].closed)
      throw UsageError("karcher_mean: shapes must share grid and closed flag");

  // Initialization: the sample with the smallest sum of squared distances
  // to a few randomly chosen anchor shapes (cheap medoid proxy).
  int init = 0;
  {
    std::mt19937_64 rng(config.seed);
    std::vector<int> anchors(n);
    std::iota(anchors.begin(), anchors.end(), 0);
    if (n > config.init_anchors) {
      std::shuffle(anchors.begin(), anchors.end(), rng);
      anchors.resize(config.init_anchors);
    }
    std::vector<Srvf> anchor_shapes;
    for (int a : anchors) anchor_shapes.push_back(shapes[a]);
    std::vector<double> score(n, 0.0);
    par::for_index(n, config.exec, [&](std::int64_t i) {
      double s = 0.0;
      for (const auto& a : anchor_shapes) {
        const double d = reg::register_pair(shapes[i], a, config.reg).distance;
        s += d * d;
      }
      score[i] = s;
    });
    init = static_cast<int>(std::min_element(score.begin(), score.end()) -
                            score.begin());
  }

  KarcherMean result;
  result.mean = shapes[init];
  std::vector<reg::Alignment> regs;
  double step = config.step;

  auto register_all = [&](const Srvf& mu) {
    std::vector<reg::Alignment> r(n);
    par::for_index(n, config.exec, [&](std::int64_t i) {
      r[i] = reg::register_pair(mu, shapes[i], config.reg);
    });
    return r;
  };

  regs = register_all(result.mean);
  result.objective_history.push_back(sum_sq_distances(regs));

  for (int it = 1; it <= config.max_iter; ++it) {
    result.iterations = it;

    Eigen::Matrix2Xd vbar = Eigen::Matrix2Xd::Zero(2, result.mean.size());
    for (int i = 0; i < n; ++i) {
      const Srvf aligned = reg::apply_alignment(shapes[i], regs[i]);
      vbar += log_map(result.mean, aligned).values;
    }
    vbar /= static_cast<double>(n);
    TangentVector update{result.mean, vbar};
    result.final_gradient_norm = update.norm();
    if (result.final_gradient_norm < config.tol) {
      result.converged = true;
      break;
    }

    // Step, backtracking if the registered objective would increase.
    const double prev_obj = result.objective_history.back();
    double trial_step = step;
    for (int half = 0; half < 5; ++half) {
      const TangentVector scaled{result.mean, trial_step * vbar};
      const Srvf trial_mean = renormalized(exp_map(result.mean, scaled));
      auto trial_regs = register_all(trial_mean);
      const double obj = sum_sq_distances(trial_regs);
      if (obj <= prev_obj + 1e-12) {
        result.mean = trial_mean;
        regs = std::move(trial_regs);
        result.objective_history.push_back(obj);
        break;
      }
      trial_step *= 0.5;
      if (half == 4) {
        // No improving step at this resolution; treat as converged to the
        // discretization floor.
        result.converged = true;
      }
    }
    if (result.converged) break;
  }

  result.aligned_samples.resize(n);
  for (int i = 0; i < n; ++i)
    result.aligned_samples[i] = reg::apply_alignment(shapes[i], regs[i]);
  return result;
}

Eigen::VectorXd flatten(const TangentVector& v) {
  const Eigen::Index m = v.base.size();
  Eigen::VectorXd row(2 * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sw = std::sqrt(v.base.weight(i));
    row(i) = sw * v.values(0, i);
    row(m + i) = sw * v.values(1, i);
  }
  return row;
}

TangentVector unflatten(const Srvf& base, const Eigen::VectorXd& row) {
  const Eigen::Index m = base.size();
  if (row.size() != 2 * m) throw UsageError("unflatten: dimension mismatch");
  TangentVector v;
  v.base = base;
  v.values.resize(2, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sw = std::sqrt(base.weight(i));
    v.values(0, i) = row(i) / sw;
    v.values(1, i) = row(m + i) / sw;
  }
  return v;
}

Eigen::MatrixXd tangent_matrix(const KarcherMean& mean) {
  const auto n = static_cast<Eigen::Index>(mean.aligned_samples.size());
  Eigen::MatrixXd v(n, 2 * mean.mean.size());
  for (Eigen::Index i = 0; i < n; ++i)
    v.row(i) = flatten(log_map(mean.mean, mean.aligned_samples[i])).transpose();
  return v;
}

PcBasis tpca(const Eigen::MatrixXd& tangent_rows, int r, const Srvf& base) {
  const Eigen::Index n = tangent_rows.rows();
  if (r < 1 || r > std::min(n - 1, tangent_rows.cols()))
    throw UsageError("tpca: r out of range (need 1 <= r <= min(n-1, 2m))");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(
      tangent_rows / std::sqrt(static_cast<double>(n - 1)),
      Eigen::ComputeThinU | Eigen::ComputeThinV);

  PcBasis basis;
  basis.base = base;
  basis.r = r;
  basis.directions = svd.matrixV().leftCols(r);
  basis.variances = svd.singularValues().head(r).array().square();
  // Deterministic sign: make the largest-magnitude entry of each direction
  // positive so serialized models do not depend on SVD internals.
  for (int j = 0; j < r; ++j) {
    Eigen::Index imax = 0;
    basis.directions.col(j).cwiseAbs().maxCoeff(&imax);
    if (basis.directions(imax, j) < 0.0) basis.directions.col(j) *= -1.0;
  }
  basis.basis_id = fnv1a(basis.directions.data(),
                         static_cast<size_t>(basis.directions.size()),
                         fnv1a(base.values.data(), static_cast<size_t>(base.values.size())));
  return basis;
}

PcCoords pc_coords(const Eigen::MatrixXd& tangent_rows, const PcBasis& basis) {
  if (tangent_rows.cols() != basis.ambient_dim())
    throw UsageError("pc_coords: dimension mismatch");
  PcCoords c;
  c.coords = tangent_rows * basis.directions;
  c.basis_id = basis.basis_id;
  return c;
}

}  // namespace manifold
}  // namespace srvf
