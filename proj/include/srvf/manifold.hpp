#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "srvf/curve.hpp"
#include "srvf/parallel.hpp"
#include "srvf/registration.hpp"

namespace srvf {
namespace manifold {

/// Element of the tangent space at `base` on the unit sphere of SRVFs.
struct TangentVector {
  Srvf base;
  Eigen::Matrix2Xd values;

  double norm() const;
};

struct MeanConfig {
  double step = 0.5;
  double tol = 1e-5;          // on the norm of the mean tangent update
  int max_iter = 50;
  int init_anchors = 10;      // medoid proxy: anchors for initialization
  std::uint64_t seed = 0;     // anchor selection
  reg::RegisterOptions reg;
  Exec exec = Exec::Parallel;
};

struct KarcherMean {
  Srvf mean;
  std::vector<Srvf> aligned_samples;  // q_i* registered to the mean
  int iterations = 0;
  double final_gradient_norm = 0.0;
  bool converged = false;
  std::vector<double> objective_history;  // sum of squared distances
};

Srvf exp_map(const Srvf& p, const TangentVector& v);
TangentVector log_map(const Srvf& p, const Srvf& q);

/// Gradient-descent Karcher mean: register all shapes to the estimate,
/// average the log maps, step along the exponential map. Registrations
/// within an iteration run in parallel.
KarcherMean karcher_mean(const std::vector<Srvf>& shapes,
                         const MeanConfig& config = {});

/// Quadrature-weighted flattening: entry blocks sqrt(w_i) * v_x(i) then
/// sqrt(w_i) * v_y(i), so Euclidean geometry on rows equals the L2 geometry
/// of tangent vectors.
Eigen::VectorXd flatten(const TangentVector& v);
TangentVector unflatten(const Srvf& base, const Eigen::VectorXd& row);

/// n x 2m tangent data matrix: row i = flatten(log_map(mean, q_i*)).
Eigen::MatrixXd tangent_matrix(const KarcherMean& mean);

/// Projection point plus the top-r principal directions (columns, in
/// flattened coordinates) and their variances, in decreasing order.
struct PcBasis {
  Srvf base;
  Eigen::MatrixXd directions;  // 2m x r
  Eigen::VectorXd variances;   // r
  int r = 0;
  std::uint64_t basis_id = 0;

  Eigen::Index ambient_dim() const { return directions.rows(); }
};

struct PcCoords {
  Eigen::MatrixXd coords;  // n x r
  std::uint64_t basis_id = 0;
};

/// Eigendecomposition of the (uncentered, at a Karcher point) sample
/// covariance V^T V / (n-1), computed through the SVD of V.
PcBasis tpca(const Eigen::MatrixXd& tangent_rows, int r, const Srvf& base);

/// Coefficients of tangent rows in the basis; rows may come from any class.
PcCoords pc_coords(const Eigen::MatrixXd& tangent_rows, const PcBasis& basis);

}  // namespace manifold
}  // namespace srvf
