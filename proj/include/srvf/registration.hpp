#pragma once

#include <Eigen/Dense>
#include <vector>

#include "srvf/curve.hpp"
#include "srvf/parallel.hpp"

namespace srvf {
namespace reg {

/// Element of SO(2).
struct Rotation2 {
  Eigen::Matrix2d matrix = Eigen::Matrix2d::Identity();

  static Rotation2 from_angle(double theta);
  double angle() const;
  bool valid(double tol = 1e-10) const;
};

/// Piecewise-linear orientation-preserving diffeomorphism of [0,1], stored
/// as knot values on the uniform inclusive grid (n knots, gamma(0)=0,
/// gamma(1)=1). For closed curves n = m+1 (the wrap sample included).
struct Reparam {
  Eigen::VectorXd knots;

  static Reparam identity(Eigen::Index n);
  Eigen::Index size() const { return knots.size(); }
  double operator()(double t) const;  // piecewise-linear evaluation
  bool monotone() const;
};

/// Composition gamma_first(gamma_second(t)), resampled on the common grid.
Reparam compose(const Reparam& first, const Reparam& second);

struct Alignment {
  Rotation2 rotation;
  Reparam reparam;
  int seed_shift = 0;   // grid index; 0 for open curves
  double distance = 0;  // arccos of the aligned inner product, in [0, pi]
};

struct RegisterOptions {
  int max_rounds = 10;      // rotation/reparam alternation cap
  double tol = 1e-6;        // stop when the inner product improves less
  int seed_stride = 1;      // closed curves: try every stride-th start point
};

Rotation2 optimal_rotation(const Srvf& q1, const Srvf& q2);
Srvf apply_rotation(const Srvf& q, const Rotation2& rot);

/// Cyclic start-point shift by s samples (closed curves).
Srvf apply_seed_shift(const Srvf& q, int s);

/// (q, gamma) = (q o gamma) sqrt(gamma'), renormalized to unit norm.
Srvf apply_reparam(const Srvf& q, const Reparam& gamma);

/// Dynamic-programming search over monotone lattice paths with local slopes
/// {1..4}x{1..4}, gcd 1. Expects rotation already applied to q2.
Reparam optimal_reparam(const Srvf& q1, const Srvf& q2);

/// DP objective value for diagnostics and oracle tests: the inner product
/// approximation maximized by optimal_reparam.
double reparam_objective(const Srvf& q1, const Srvf& q2, const Reparam& gamma);

/// seed shift, then reparam, then rotation.
Srvf apply_alignment(const Srvf& q2, const Alignment& a);

/// Cosine of the aligned pair under exact integration of the linear
/// interpolants (the DP objective, normalized). This is the quantity
/// register_pair maximizes and arccos-es into `distance`; it is symmetric
/// under swapping the pair with transposed transforms.
double aligned_cosine(const Srvf& q1, const Srvf& q2, const Alignment& a);

/// Full registration of q2 onto q1 over rotation, re-parameterization and
/// (closed curves) starting point. The stored transforms reproduce
/// `distance` exactly by construction.
Alignment register_pair(const Srvf& q1, const Srvf& q2,
                        const RegisterOptions& opts = {});

/// Great-circle path from q1 to an already-registered q2; steps+1 samples.
std::vector<Srvf> geodesic_path(const Srvf& q1, const Srvf& q2_aligned,
                                int steps);

/// Registers every shape onto `ref`; results land in per-index slots, so
/// Serial and Parallel are bitwise identical.
std::vector<Alignment> register_batch(const Srvf& ref,
                                      const std::vector<Srvf>& shapes,
                                      const RegisterOptions& opts = {},
                                      Exec exec = Exec::Parallel);

/// Symmetric matrix of pairwise shape distances.
Eigen::MatrixXd distance_matrix(const std::vector<Srvf>& shapes,
                                const RegisterOptions& opts = {},
                                Exec exec = Exec::Parallel);

}  // namespace reg
}  // namespace srvf
