#include "srvf/registration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "srvf/errors.hpp"

namespace srvf {
namespace reg {

namespace {

// Local DP slopes (drow, dcol) in {1..4}^2 with gcd 1.
struct Slope {
  int dr, dc;
};
constexpr Slope kSlopes[] = {{1, 1}, {1, 2}, {1, 3}, {1, 4}, {2, 1}, {3, 1},
                             {4, 1}, {2, 3}, {3, 2}, {3, 4}, {4, 3}};

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

void check_compatible(const Srvf& a, const Srvf& b) {
  if (a.size() != b.size() || a.closed != b.closed)
    throw UsageError("registration: mismatched grids or closed flags");
}

// Samples on the inclusive uniform grid used by the DP and by Reparam:
// open curves as-is, closed curves with the wrap sample appended.
Eigen::Matrix2Xd extended_samples(const Srvf& q) {
  if (!q.closed) return q.values;
  Eigen::Matrix2Xd out(2, q.size() + 1);
  out.leftCols(q.size()) = q.values;
  out.col(q.size()) = q.values.col(0);
  return out;
}

Eigen::Vector2d interp_col(const Eigen::Matrix2Xd& v, double idx) {
  const Eigen::Index n = v.cols();
  if (idx <= 0.0) return v.col(0);
  if (idx >= static_cast<double>(n - 1)) return v.col(n - 1);
  const auto lo = static_cast<Eigen::Index>(idx);
  const double f = idx - static_cast<double>(lo);
  return (1.0 - f) * v.col(lo) + f * v.col(lo + 1);
}

// Integral of q1(u).q2(j0 + s(u-i0)) du over [ua, ub] in index coordinates,
// by Simpson's rule per subinterval between grid-line crossings of either
// axis. Both factors are piecewise linear in u, so Simpson is exact and the
// weight is symmetric under transposing the lattice.
double edge_weight(const Eigen::Matrix2Xd& q1e, const Eigen::Matrix2Xd& q2e,
                   int i0, int j0, int i1, int j1) {
  const double s = static_cast<double>(j1 - j0) / static_cast<double>(i1 - i0);
  double breaks[10];
  int nb = 0;
  for (int k = i0; k <= i1; ++k) breaks[nb++] = static_cast<double>(k);
  for (int l = j0 + 1; l < j1; ++l)
    breaks[nb++] = static_cast<double>(i0) + static_cast<double>(l - j0) / s;
  std::sort(breaks, breaks + nb);

  auto f = [&](double u) {
    const double col = static_cast<double>(j0) + s * (u - static_cast<double>(i0));
    return interp_col(q1e, u).dot(interp_col(q2e, col));
  };

  double sum = 0.0;
  for (int k = 0; k + 1 < nb; ++k) {
    const double a = breaks[k], b = breaks[k + 1];
    if (b - a < 1e-12) continue;
    sum += (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
  }
  return std::sqrt(s) * sum;
}

struct DpResult {
  Reparam gamma;
  double objective = 0.0;
};

DpResult dp_reparam(const Eigen::Matrix2Xd& q1e, const Eigen::Matrix2Xd& q2e,
                    double h) {
  const int n = static_cast<int>(q1e.cols());
  const double neg_inf = -std::numeric_limits<double>::infinity();
  Eigen::MatrixXd score = Eigen::MatrixXd::Constant(n, n, neg_inf);
  Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic> back(n, n);
  back.setConstant(-1);
  score(0, 0) = 0.0;

  for (int i = 1; i < n; ++i) {
    for (int j = 1; j < n; ++j) {
      double best = neg_inf;
      std::int8_t arg = -1;
      for (std::int8_t k = 0; k < static_cast<std::int8_t>(std::size(kSlopes)); ++k) {
        const int pi = i - kSlopes[k].dr, pj = j - kSlopes[k].dc;
        if (pi < 0 || pj < 0 || score(pi, pj) == neg_inf) continue;
        const double cand =
            score(pi, pj) + edge_weight(q1e, q2e, pi, pj, i, j);
        if (cand > best) {
          best = cand;
          arg = k;
        }
      }
      score(i, j) = best;
      back(i, j) = arg;
    }
  }

  // Backtrack and fill skipped rows by linear interpolation (exact: each
  // DP edge is linear in index space).
  Eigen::VectorXd col_at_row(n);
  int i = n - 1, j = n - 1;
  col_at_row(i) = static_cast<double>(j);
  while (i > 0 || j > 0) {
    const std::int8_t k = back(i, j);
    if (k < 0) throw NumericalError("reparam DP: no path to origin");
    const int pi = i - kSlopes[k].dr, pj = j - kSlopes[k].dc;
    const double slope = static_cast<double>(j - pj) / static_cast<double>(i - pi);
    for (int r = pi; r < i; ++r)
      col_at_row(r) = static_cast<double>(pj) + slope * static_cast<double>(r - pi);
    i = pi;
    j = pj;
  }

  DpResult out;
  out.objective = score(n - 1, n - 1) * h;
  out.gamma.knots = col_at_row * h;
  out.gamma.knots(0) = 0.0;
  out.gamma.knots(n - 1) = 1.0;
  return out;
}

}  // namespace

Rotation2 Rotation2::from_angle(double theta) {
  Rotation2 r;
  r.matrix << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

double Rotation2::angle() const { return std::atan2(matrix(1, 0), matrix(0, 0)); }

bool Rotation2::valid(double tol) const {
  const Eigen::Matrix2d err = matrix.transpose() * matrix - Eigen::Matrix2d::Identity();
  return err.cwiseAbs().maxCoeff() < tol && matrix.determinant() > 0.0;
}

Reparam Reparam::identity(Eigen::Index n) {
  Reparam g;
  g.knots = Eigen::VectorXd::LinSpaced(n, 0.0, 1.0);
  return g;
}

double Reparam::operator()(double t) const {
  const Eigen::Index n = knots.size();
  const double idx = t * static_cast<double>(n - 1);
  if (idx <= 0.0) return knots(0);
  if (idx >= static_cast<double>(n - 1)) return knots(n - 1);
  const auto lo = static_cast<Eigen::Index>(idx);
  const double f = idx - static_cast<double>(lo);
  return (1.0 - f) * knots(lo) + f * knots(lo + 1);
}

bool Reparam::monotone() const {
  for (Eigen::Index i = 1; i < knots.size(); ++i)
    if (knots(i) <= knots(i - 1)) return false;
  return true;
}

Reparam compose(const Reparam& first, const Reparam& second) {
  Reparam out;
  out.knots.resize(second.size());
  for (Eigen::Index i = 0; i < second.size(); ++i)
    out.knots(i) = first(second.knots(i));
  out.knots(0) = 0.0;
  out.knots(second.size() - 1) = 1.0;
  return out;
}

Rotation2 optimal_rotation(const Srvf& q1, const Srvf& q2) {
  check_compatible(q1, q2);
  Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
  for (Eigen::Index i = 0; i < q1.size(); ++i)
    a += q1.weight(i) * q1.values.col(i) * q2.values.col(i).transpose();
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double d = (svd.matrixU() * svd.matrixV().transpose()).determinant();
  Rotation2 rot;
  rot.matrix = svd.matrixU() * Eigen::Vector2d(1.0, d).asDiagonal() *
               svd.matrixV().transpose();
  return rot;
}

Srvf apply_rotation(const Srvf& q, const Rotation2& rot) {
  Srvf out = q;
  out.values = rot.matrix * q.values;
  return out;
}

Srvf apply_seed_shift(const Srvf& q, int s) {
  const auto m = static_cast<int>(q.size());
  s = ((s % m) + m) % m;
  if (!q.closed || s == 0) return q;
  Srvf out = q;
  for (int i = 0; i < m; ++i)
    out.values.col(i) = q.values.col((i + s) % m);
  return out;
}

Srvf apply_reparam(const Srvf& q, const Reparam& gamma) {
  const Eigen::Index m = q.size();
  const Eigen::Index n_expected = q.closed ? m + 1 : m;
  if (gamma.size() != n_expected)
    throw UsageError("apply_reparam: gamma grid does not match the SRVF");
  if (!gamma.monotone())
    throw NumericalError("apply_reparam: non-monotone gamma");

  const Eigen::Index n = gamma.size();
  const double hk = 1.0 / static_cast<double>(n - 1);
  Eigen::VectorXd dgamma(n);
  dgamma(0) = (gamma.knots(1) - gamma.knots(0)) / hk;
  dgamma(n - 1) = (gamma.knots(n - 1) - gamma.knots(n - 2)) / hk;
  for (Eigen::Index i = 1; i + 1 < n; ++i)
    dgamma(i) = (gamma.knots(i + 1) - gamma.knots(i - 1)) / (2.0 * hk);

  Srvf out = q;
  if (!q.closed) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const double idx = gamma.knots(i) * static_cast<double>(m - 1);
      out.values.col(i) = interp_col(q.values, idx) * std::sqrt(dgamma(i));
    }
  } else {
    for (Eigen::Index i = 0; i < m; ++i) {
      const double idx = gamma.knots(i) * static_cast<double>(m);
      const auto lo = static_cast<Eigen::Index>(idx);
      const double f = idx - static_cast<double>(lo);
      const Eigen::Vector2d v = (1.0 - f) * q.values.col(lo % m) +
                                f * q.values.col((lo + 1) % m);
      out.values.col(i) = v * std::sqrt(dgamma(i));
    }
  }
  return renormalized(std::move(out));
}

Reparam optimal_reparam(const Srvf& q1, const Srvf& q2) {
  check_compatible(q1, q2);
  return dp_reparam(extended_samples(q1), extended_samples(q2), q1.grid_step()).gamma;
}

double reparam_objective(const Srvf& q1, const Srvf& q2, const Reparam& gamma) {
  // Same quadrature as the DP edge weights: Simpson per subinterval between
  // grid-line crossings of either axis, in index coordinates.
  const Eigen::Matrix2Xd q1e = extended_samples(q1);
  const Eigen::Matrix2Xd q2e = extended_samples(q2);
  const int n = static_cast<int>(q1e.cols());
  const double h = q1.grid_step();
  double sum = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    const double ja = gamma.knots(i) / h, jb = gamma.knots(i + 1) / h;
    const double s = jb - ja;
    if (s <= 0.0) continue;
    std::vector<double> breaks{static_cast<double>(i), static_cast<double>(i) + 1.0};
    for (int l = static_cast<int>(std::floor(ja)) + 1; l < jb; ++l)
      if (static_cast<double>(l) > ja)
        breaks.push_back(static_cast<double>(i) + (static_cast<double>(l) - ja) / s);
    std::sort(breaks.begin(), breaks.end());
    auto f = [&](double u) {
      return interp_col(q1e, u).dot(interp_col(q2e, ja + s * (u - static_cast<double>(i))));
    };
    for (size_t k = 0; k + 1 < breaks.size(); ++k) {
      const double a = breaks[k], b = breaks[k + 1];
      if (b - a < 1e-12) continue;
      sum += std::sqrt(s) * (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
    }
  }
  return sum * h;
}

Srvf apply_alignment(const Srvf& q2, const Alignment& a) {
  return apply_rotation(apply_reparam(apply_seed_shift(q2, a.seed_shift), a.reparam),
                        a.rotation);
}

namespace {

// Exact integral of |PL[q]|^2 over [0,1] (Simpson per interval).
double interp_norm_sq(const Srvf& q) {
  const Eigen::Matrix2Xd ext = extended_samples(q);
  const double h = q.grid_step();
  double s = 0.0;
  for (Eigen::Index i = 0; i + 1 < ext.cols(); ++i) {
    const double f0 = ext.col(i).squaredNorm();
    const double f1 = ext.col(i + 1).squaredNorm();
    const double fm = (0.5 * (ext.col(i) + ext.col(i + 1))).squaredNorm();
    s += h / 6.0 * (f0 + 4.0 * fm + f1);
  }
  return s;
}

}  // namespace

double aligned_cosine(const Srvf& q1, const Srvf& q2, const Alignment& a) {
  const Srvf q2r =
      apply_rotation(apply_seed_shift(q2, a.seed_shift), a.rotation);
  const double path_integral = reparam_objective(q1, q2r, a.reparam);
  return path_integral / std::sqrt(interp_norm_sq(q1) * interp_norm_sq(q2r));
}

Alignment register_pair(const Srvf& q1, const Srvf& q2,
                        const RegisterOptions& opts) {
  check_compatible(q1, q2);
  const Eigen::Index m = q1.size();
  const Eigen::Index n_knots = q2.closed ? m + 1 : m;

  Alignment best;
  best.reparam = Reparam::identity(n_knots);
  // The plain nodal inner product of the untransformed pair is kept as a
  // floor candidate; it is exactly symmetric and guarantees registration
  // never reports a larger distance than the unaligned one.
  double best_ip = inner_product(q1, q2);

  auto consider = [&](int seed, const Rotation2& rot, const Reparam& gamma) {
    Alignment cand;
    cand.seed_shift = seed;
    cand.rotation = rot;
    cand.reparam = gamma;
    const double ip = aligned_cosine(q1, q2, cand);
    if (ip > best_ip) {
      best_ip = ip;
      best = cand;
    }
    return ip;
  };

  // The DP slope bounds apply to the total warp as well: compositions that
  // leave [1/4, 4] pinch the curve and are dropped. This keeps the searched
  // warps honest diffeomorphism approximations and invertible within the
  // same family, which the reverse-direction pass below relies on.
  auto slopes_ok = [](const Reparam& g) {
    const double h = 1.0 / static_cast<double>(g.size() - 1);
    for (Eigen::Index i = 1; i < g.size(); ++i) {
      const double s = (g.knots(i) - g.knots(i - 1)) / h;
      if (s < 0.25 - 1e-9 || s > 4.0 + 1e-9) return false;
    }
    return true;
  };

  // Rotation/reparam alternation from a given initial state; every visited
  // state is offered to `consider`. Returns the best state seen.
  struct SearchState {
    double value = -2.0;
    Rotation2 rotation;
    Reparam gamma;
  };
  auto alternate = [&](int seed, const Srvf& q2s, Rotation2 rot_total,
                       Reparam gamma_total) {
    SearchState local{consider(seed, rot_total, gamma_total), rot_total,
                      gamma_total};
    double prev = local.value;
    for (int round = 0; round < opts.max_rounds; ++round) {
      Srvf cur = apply_alignment(q2s, {rot_total, gamma_total, 0, 0.0});
      const Rotation2 step_rot = optimal_rotation(q1, cur);
      rot_total.matrix = step_rot.matrix * rot_total.matrix;
      const double rot_ip = consider(seed, rot_total, gamma_total);
      if (rot_ip > local.value) local = {rot_ip, rot_total, gamma_total};

      cur = apply_alignment(q2s, {rot_total, gamma_total, 0, 0.0});
      const Reparam step_gamma = optimal_reparam(q1, cur);
      const Reparam composed = compose(gamma_total, step_gamma);
      if (!slopes_ok(composed)) break;
      gamma_total = composed;
      const double ip = consider(seed, rot_total, gamma_total);
      if (ip > local.value) local = {ip, rot_total, gamma_total};

      if (ip - prev < opts.tol) break;
      prev = ip;
    }
    return local;
  };

  // Deterministic sub-cell refinement: coordinate descent on the warp knots
  // with shrinking steps, interleaved with rotation updates. Recovers the
  // accuracy the integer lattice quantizes away.
  auto polish = [&](int seed, SearchState state) {
    const Srvf q2s = apply_seed_shift(q2, seed);
    const double h = 1.0 / static_cast<double>(n_knots - 1);
    auto value_of = [&](const Rotation2& rot, const Reparam& g) {
      return aligned_cosine(q1, q2, Alignment{rot, g, seed, 0.0});
    };
    double value = value_of(state.rotation, state.gamma);
    for (double step : {0.5 * h, 0.25 * h, 0.125 * h, 0.0625 * h}) {
      for (int sweep = 0; sweep < 2; ++sweep) {
        bool improved = false;
        for (Eigen::Index i = 1; i + 1 < n_knots; ++i) {
          for (double delta : {step, -step}) {
            Reparam trial = state.gamma;
            trial.knots(i) += delta;
            const double lo = trial.knots(i) - trial.knots(i - 1);
            const double hi = trial.knots(i + 1) - trial.knots(i);
            if (lo < 0.25 * h || hi < 0.25 * h || lo > 4.0 * h || hi > 4.0 * h)
              continue;
            const double trial_value = value_of(state.rotation, trial);
            if (trial_value > value + 1e-14) {
              value = trial_value;
              state.gamma = trial;
              improved = true;
              break;
            }
          }
        }
        const Srvf warped = apply_reparam(q2s, state.gamma);
        const Rotation2 rot = optimal_rotation(q1, warped);
        if (value_of(rot, state.gamma) > value) {
          value = value_of(rot, state.gamma);
          state.rotation = rot;
          improved = true;
        }
        if (!improved) break;
      }
    }
    consider(seed, state.rotation, state.gamma);
  };

  if (q2.closed) {
    const int stride = std::max(1, opts.seed_stride);
    std::vector<std::pair<double, int>> seed_rank;
    std::vector<SearchState> seed_state(static_cast<size_t>(m));
    for (int s = 0; s < m; s += stride) {
      seed_state[static_cast<size_t>(s)] = alternate(
          s, apply_seed_shift(q2, s), Rotation2{}, Reparam::identity(n_knots));
      seed_rank.emplace_back(seed_state[static_cast<size_t>(s)].value, s);
    }
    std::sort(seed_rank.begin(), seed_rank.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    const size_t refine = std::min<size_t>(3, seed_rank.size());
    for (size_t k = 0; k < refine; ++k)
      polish(seed_rank[k].second, seed_state[static_cast<size_t>(seed_rank[k].second)]);
  } else {
    // Open curves: the alternation only steers the rotation; the final
    // candidates are single DP refits at the discovered rotations. Run the
    // search from both directions -- the reverse run is bit-for-bit the
    // forward run of the swapped call, and the DP value is exact under
    // transposition, so both argument orders draw from matching candidate
    // pools and report symmetric distances.
    auto search_rotation = [&](const Srvf& ref, const Srvf& moving) {
      Rotation2 rot_total, rot_best = optimal_rotation(ref, moving);
      Reparam gamma_total = Reparam::identity(n_knots);
      double best_seen = -2.0, prev = -2.0;
      for (int round = 0; round < opts.max_rounds; ++round) {
        Srvf cur = apply_alignment(moving, {rot_total, gamma_total, 0, 0.0});
        const Rotation2 step_rot = optimal_rotation(ref, cur);
        rot_total.matrix = step_rot.matrix * rot_total.matrix;

        cur = apply_alignment(moving, {rot_total, gamma_total, 0, 0.0});
        const Reparam step_gamma = optimal_reparam(ref, cur);
        const Reparam composed = compose(gamma_total, step_gamma);
        if (!slopes_ok(composed)) break;
        gamma_total = composed;
        const double ip =
            aligned_cosine(ref, moving, Alignment{rot_total, gamma_total, 0, 0.0});
        if (ip > best_seen) {
          best_seen = ip;
          rot_best = rot_total;
        }
        if (ip - prev < opts.tol) break;
        prev = ip;
      }
      return rot_best;
    };

    const Rotation2 o_first = optimal_rotation(q1, q2);
    const Rotation2 o_fwd = search_rotation(q1, q2);
    Rotation2 o_rev_t;
    o_rev_t.matrix = search_rotation(q2, q1).matrix.transpose();

    for (const Rotation2& rot : {o_first, o_fwd, o_rev_t}) {
      consider(0, rot, Reparam::identity(n_knots));
      consider(0, rot, optimal_reparam(q1, apply_rotation(q2, rot)));
    }
  }

  best.distance = std::acos(clamp_unit(best_ip));
  return best;
}

std::vector<Srvf> geodesic_path(const Srvf& q1, const Srvf& q2_aligned,
                                int steps) {
  if (steps < 1) throw UsageError("geodesic_path: steps must be positive");
  check_compatible(q1, q2_aligned);
  const double ip = clamp_unit(inner_product(q1, q2_aligned));
  const double theta = std::acos(ip);
  if (theta >= std::numbers::pi - 1e-6)
    throw NumericalError("geodesic_path: antipodal inputs");

  std::vector<Srvf> path;
  path.reserve(steps + 1);
  for (int k = 0; k <= steps; ++k) {
    const double tau = static_cast<double>(k) / steps;
    Srvf p = q1;
    if (std::sin(theta) < 1e-9) {
      p.values = (1.0 - tau) * q1.values + tau * q2_aligned.values;
      p = renormalized(std::move(p));
    } else {
      p.values = (std::sin((1.0 - tau) * theta) * q1.values +
                  std::sin(tau * theta) * q2_aligned.values) /
                 std::sin(theta);
    }
    path.push_back(std::move(p));
  }
  return path;
}

std::vector<Alignment> register_batch(const Srvf& ref,
                                      const std::vector<Srvf>& shapes,
                                      const RegisterOptions& opts, Exec exec) {
  std::vector<Alignment> out(shapes.size());
  par::for_index(static_cast<std::int64_t>(shapes.size()), exec,
                 [&](std::int64_t i) { out[i] = register_pair(ref, shapes[i], opts); });
  return out;
}

Eigen::MatrixXd distance_matrix(const std::vector<Srvf>& shapes,
                                const RegisterOptions& opts, Exec exec) {
  const auto n = static_cast<Eigen::Index>(shapes.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  std::vector<double> dist(pairs.size());
  par::for_index(static_cast<std::int64_t>(pairs.size()), exec, [&](std::int64_t k) {
    dist[k] = register_pair(shapes[pairs[k].first], shapes[pairs[k].second], opts).distance;
  });
  for (size_t k = 0; k < pairs.size(); ++k) {
    d(pairs[k].first, pairs[k].second) = dist[k];
    d(pairs[k].second, pairs[k].first) = dist[k];
  }
  return d;
}

}  // namespace reg
}  // namespace srvf
