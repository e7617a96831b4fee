#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "dp_oracle.hpp"
#include "srvf/curve.hpp"
#include "srvf/errors.hpp"
#include "srvf/registration.hpp"
#include "srvf/synthetic.hpp"
#include "testutil.hpp"

using namespace srvf;
using namespace srvf::reg;
namespace syn = srvf::synthetic;
constexpr double kPi = std::numbers::pi;

namespace {

Eigen::Vector2d oracle_lerp(const Eigen::Matrix2Xd& v, double idx) {
  return dp_oracle::lerp(v, idx);
}

double oracle_best(const Srvf& q1, const Srvf& q2) {
  return dp_oracle::best_path_value(q1, q2);
}

Reparam random_monotone_gamma(std::uint64_t seed, Eigen::Index n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> slope(0.4, 2.5);
  Reparam g;
  g.knots.resize(n);
  g.knots(0) = 0.0;
  for (Eigen::Index i = 1; i < n; ++i) g.knots(i) = g.knots(i - 1) + slope(rng);
  g.knots /= g.knots(n - 1);
  g.knots(n - 1) = 1.0;
  return g;
}

}  // namespace

TEST_SUITE_BEGIN("registration");

TEST_CASE("optimal rotation of a shape with itself is the identity") {
  const Srvf q = testutil::random_srvf(1, 80, false);
  const Rotation2 rot = optimal_rotation(q, q);
  CHECK(rot.valid());
  CHECK(std::fabs(rot.angle()) < 1e-10);
}

TEST_CASE("optimal rotation recovers a known angle") {
  const Srvf q1 = testutil::random_srvf(2, 80, false);
  const double theta0 = 0.83;
  const Srvf q2 = apply_rotation(q1, Rotation2::from_angle(-theta0));
  const Rotation2 rot = optimal_rotation(q1, q2);
  CHECK(rot.angle() == doctest::Approx(theta0).epsilon(1e-8));
}

TEST_CASE("svd rotation beats a 1-degree brute-force sweep") {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    const Srvf q1 = testutil::random_srvf(seed, 60, false);
    const Srvf q2 = testutil::random_srvf(seed + 100, 60, false);
    const Rotation2 rot = optimal_rotation(q1, q2);
    const double best = inner_product(q1, apply_rotation(q2, rot));
    for (int deg = 0; deg < 360; ++deg) {
      const Rotation2 cand = Rotation2::from_angle(deg * kPi / 180.0);
      CHECK(best >= inner_product(q1, apply_rotation(q2, cand)) - 1e-12);
    }
  }
}

TEST_CASE("identity reparam leaves the srvf unchanged") {
  const Srvf q = testutil::random_srvf(6, 90, true);
  const Srvf out = apply_reparam(q, Reparam::identity(91));
  CHECK((out.values - q.values).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("the srvf action of a diffeomorphism is a discrete isometry") {
  const int m = 200;
  const Srvf q = testutil::random_srvf(7, m, false);
  const Reparam g = random_monotone_gamma(8, m);
  CHECK(norm(apply_reparam(q, g)) == doctest::Approx(1.0).epsilon(1e-12));

  // recompute without the final renormalization: the raw norm should
  // already be close to one
  double raw = 0.0;
  const double h = 1.0 / (m - 1);
  Eigen::VectorXd dg(m);
  dg(0) = (g.knots(1) - g.knots(0)) / h;
  dg(m - 1) = (g.knots(m - 1) - g.knots(m - 2)) / h;
  for (int i = 1; i + 1 < m; ++i) dg(i) = (g.knots(i + 1) - g.knots(i - 1)) / (2 * h);
  for (int i = 0; i < m; ++i) {
    const double w = (i == 0 || i == m - 1) ? h / 2 : h;
    raw += w * oracle_lerp(q.values, g.knots(i) * (m - 1)).squaredNorm() * dg(i);
  }
  CHECK(raw == doctest::Approx(1.0).epsilon(5e-3));
}

TEST_CASE("gamma(t) = t^2 on a constant-speed segment") {
  const int m = 400;
  const Srvf q = testutil::srvf_of(syn::segment(m), m);
  Reparam g;
  g.knots = Eigen::VectorXd::LinSpaced(m, 0.0, 1.0).array().square();
  const Srvf out = apply_reparam(q, g);
  for (int i = 1; i < m - 1; ++i) {
    const double t = static_cast<double>(i) / (m - 1);
    CHECK(out.values.col(i).norm() ==
          doctest::Approx(std::sqrt(2.0 * t)).epsilon(1e-4));
  }
}

TEST_CASE("non-monotone gamma is rejected") {
  const Srvf q = testutil::random_srvf(9, 40, false);
  Reparam g = Reparam::identity(40);
  g.knots(20) = g.knots(22);
  g.knots(21) = g.knots(19);
  CHECK_THROWS_AS(apply_reparam(q, g), NumericalError);
}

TEST_CASE("dp self-alignment is the identity within a grid cell") {
  const Srvf q = testutil::random_srvf(10, 60, false);
  const Reparam g = optimal_reparam(q, q);
  const Eigen::VectorXd id = Eigen::VectorXd::LinSpaced(60, 0.0, 1.0);
  CHECK((g.knots - id).cwiseAbs().maxCoeff() <= 1.0 / 59.0 + 1e-12);
}

TEST_CASE("dp recovers a constructed warp") {
  // known piecewise-linear warp with a few segments
  const int m = 150;
  const Srvf q1 = testutil::random_srvf(11, m, false);
  Reparam g0;
  g0.knots.resize(m);
  const double xs[] = {0.0, 0.3, 0.7, 1.0};
  const double ys[] = {0.0, 0.45, 0.8, 1.0};
  for (int i = 0; i < m; ++i) {
    const double t = static_cast<double>(i) / (m - 1);
    int seg = 0;
    while (seg < 2 && t > xs[seg + 1]) ++seg;
    g0.knots(i) = ys[seg] + (ys[seg + 1] - ys[seg]) * (t - xs[seg]) /
                                (xs[seg + 1] - xs[seg]);
  }
  const Srvf q2_inv = apply_reparam(q1, g0);
  const Reparam g = optimal_reparam(q1, q2_inv);
  const Srvf recovered = apply_reparam(q2_inv, g);
  CHECK(inner_product(q1, recovered) >= 0.999);
}

TEST_CASE("dp equals the exhaustive path optimum on small grids") {
  // open curves: n = m; closed curves: n = m + 1. All instances satisfy
  // m <= 20.
  for (std::uint64_t seed : {20u, 21u, 22u, 23u}) {
    const bool closed = seed % 2 == 0;
    const int m = closed ? 19 : 20;
    const Srvf q1 = testutil::random_srvf(seed, m, closed, 2, 0.4);
    const Srvf q2 = testutil::random_srvf(seed + 50, m, closed, 2, 0.4);
    const double oracle = oracle_best(q1, q2);
    const Reparam g = optimal_reparam(q1, q2);
    const double dp_value = reparam_objective(q1, q2, g);
    CHECK(dp_value == doctest::Approx(oracle).epsilon(1e-10));
  }
}

TEST_CASE("pure enumeration confirms the memoized oracle on tiny grids") {
  for (std::uint64_t seed : {30u, 31u}) {
    const int m = 7;
    const Srvf q1 = testutil::random_srvf(seed, m, false, 2, 0.4);
    const Srvf q2 = testutil::random_srvf(seed + 50, m, false, 2, 0.4);
    double best = -std::numeric_limits<double>::infinity();
    long paths = 0;
    dp_oracle::enumerate(q1.values, q2.values, 0, 0, 0.0, best, paths);
    CHECK(paths > 10);
    CHECK(best * q1.grid_step() == doctest::Approx(oracle_best(q1, q2)).epsilon(1e-12));
    const double dp_value = reparam_objective(q1, q2, optimal_reparam(q1, q2));
    CHECK(dp_value == doctest::Approx(best * q1.grid_step()).epsilon(1e-10));
  }
}

TEST_CASE("registering a shape to itself gives zero distance") {
  const Srvf q = testutil::random_srvf(13, 100, true);
  CHECK(register_pair(q, q).distance < 1e-6);
}

TEST_CASE("registration undoes rotation + warp + seed shift") {
  const int m = 100;
  for (std::uint64_t seed : {14u, 15u, 16u}) {
    const Srvf q = testutil::random_srvf(seed, m, true);
    Srvf moved = apply_seed_shift(q, 37);
    moved = apply_reparam(moved,
                          testutil::random_smooth_gamma(seed + 1, m + 1, 0.35));
    moved = apply_rotation(moved, Rotation2::from_angle(1.1));
    const Alignment a = register_pair(q, moved);
    CHECK(a.distance < 0.05);
  }
}

TEST_CASE("alignment invariant: stored transforms reproduce the distance") {
  const Srvf q1 = testutil::random_srvf(16, 80, true);
  const Srvf q2 = testutil::random_srvf(17, 80, true);
  const Alignment a = register_pair(q1, q2);
  const double ip = aligned_cosine(q1, q2, a);
  CHECK(std::acos(std::clamp(ip, -1.0, 1.0)) ==
        doctest::Approx(a.distance).epsilon(1e-8));
  // the nodal evaluation of the applied transforms agrees to quadrature
  // accuracy
  const double nodal = inner_product(q1, apply_alignment(q2, a));
  CHECK(std::acos(std::clamp(nodal, -1.0, 1.0)) ==
        doctest::Approx(a.distance).epsilon(2e-2));
  CHECK(a.rotation.valid());
  CHECK(a.reparam.monotone());
}

TEST_CASE("circle vs square: positive, symmetric distance") {
  const int m = 100;
  const Srvf a = testutil::srvf_of(syn::circle(256), m);
  const Srvf b = testutil::srvf_of(syn::square(256), m);
  const double dab = register_pair(a, b).distance;
  const double dba = register_pair(b, a).distance;
  CHECK(dab > 0.05);
  CHECK(std::fabs(dab - dba) < 1e-6);
}

TEST_CASE("registration never increases the distance") {
  for (std::uint64_t seed = 40; seed < 46; ++seed) {
    const bool closed = seed % 2 == 0;
    const Srvf q1 = testutil::random_srvf(seed, 60, closed);
    const Srvf q2 = testutil::random_srvf(seed + 500, 60, closed);
    const double unaligned =
        std::acos(std::clamp(inner_product(q1, q2), -1.0, 1.0));
    const Alignment a = register_pair(q1, q2);
    CHECK(a.distance <= unaligned + 1e-12);
    CHECK(a.distance >= 0.0);
    CHECK(a.distance <= kPi);
  }
}

TEST_CASE("shape distance is symmetric on random smooth shapes") {
  for (std::uint64_t seed : {50u, 51u, 52u}) {
    const Srvf q1 = testutil::random_srvf(seed, 100, false);
    const Srvf q2 = testutil::random_srvf(seed + 500, 100, false);
    const double dab = register_pair(q1, q2).distance;
    const double dba = register_pair(q2, q1).distance;
    CHECK(std::fabs(dab - dba) < 1e-4);
  }
}

TEST_CASE("geodesic endpoints, norms, and arc length") {
  const Srvf q1 = testutil::random_srvf(60, 120, true);
  Srvf q2 = testutil::random_srvf(61, 120, true);
  const Alignment a = register_pair(q1, q2);
  q2 = apply_alignment(q2, a);

  const auto path = geodesic_path(q1, q2, 50);
  REQUIRE(path.size() == 51);
  CHECK((path.front().values - q1.values).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((path.back().values - q2.values).cwiseAbs().maxCoeff() < 1e-10);
  for (const auto& p : path) CHECK(std::fabs(norm(p) - 1.0) < 1e-10);

  double chord_sum = 0.0;
  for (size_t k = 0; k + 1 < path.size(); ++k)
    chord_sum += std::acos(std::clamp(
        inner_product(path[k], path[k + 1]), -1.0, 1.0));
  const double theta = std::acos(std::clamp(inner_product(q1, q2), -1.0, 1.0));
  CHECK(chord_sum == doctest::Approx(theta).epsilon(0.01));
}

TEST_CASE("geodesic rejects antipodal inputs") {
  Srvf q = testutil::random_srvf(62, 50, false);
  Srvf anti = q;
  anti.values = -q.values;
  CHECK_THROWS_AS(geodesic_path(q, anti, 10), NumericalError);
}

TEST_CASE("mismatched grids are rejected") {
  const Srvf a = testutil::random_srvf(70, 50, false);
  const Srvf b = testutil::random_srvf(71, 60, false);
  CHECK_THROWS_AS(register_pair(a, b), UsageError);
  const Srvf c = testutil::random_srvf(72, 50, true);
  CHECK_THROWS_AS(register_pair(a, c), UsageError);
}

TEST_SUITE_END();
