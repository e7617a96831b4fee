#include "srvf/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace srvf {
namespace synthetic {

namespace {
constexpr double kPi = std::numbers::pi;
}

PlanarCurve circle(int m, double radius) {
  PlanarCurve c;
  c.closed = true;
  c.points.resize(2, m);
  for (int i = 0; i < m; ++i) {
    const double th = 2.0 * kPi * i / m;
    c.points.col(i) << radius * std::cos(th), radius * std::sin(th);
  }
  return c;
}

PlanarCurve square(int m) {
  PlanarCurve corners;
  corners.closed = true;
  corners.points.resize(2, 4);
  corners.points << 0, 1, 1, 0, 0, 0, 1, 1;
  return resample_arclength(corners, m);
}

PlanarCurve segment(int m, double angle) {
  PlanarCurve c;
  c.closed = false;
  c.points.resize(2, m);
  const Eigen::Vector2d dir(std::cos(angle), std::sin(angle));
  for (int i = 0; i < m; ++i)
    c.points.col(i) = dir * (static_cast<double>(i) / (m - 1));
  return c;
}

PlanarCurve random_smooth_curve(std::uint64_t seed, int m, bool closed,
                                int harmonics, double amplitude) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  PlanarCurve c;
  c.closed = closed;
  c.points.resize(2, m);
  if (closed) {
    std::vector<double> a(harmonics), b(harmonics);
    for (int h = 0; h < harmonics; ++h) {
      const double scale = amplitude / ((h + 1.0) * (h + 1.0));
      a[h] = scale * gauss(rng);
      b[h] = scale * gauss(rng);
    }
    for (int i = 0; i < m; ++i) {
      const double th = 2.0 * kPi * i / m;
      double r = 1.0;
      for (int h = 0; h < harmonics; ++h)
        r += a[h] * std::cos((h + 1) * th) + b[h] * std::sin((h + 1) * th);
      c.points.col(i) << r * std::cos(th), r * std::sin(th);
    }
  } else {
    std::vector<double> a(harmonics);
    for (int h = 0; h < harmonics; ++h)
      a[h] = amplitude / ((h + 1.0) * (h + 1.0)) * gauss(rng);
    for (int i = 0; i < m; ++i) {
      const double t = static_cast<double>(i) / (m - 1);
      double y = 0.0;
      for (int h = 0; h < harmonics; ++h) y += a[h] * std::sin((h + 1) * kPi * t);
      c.points.col(i) << t, y;
    }
  }
  return c;
}

std::vector<PlanarCurve> make_benchmark(const BenchmarkOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);

  std::vector<PlanarCurve> out;
  const int total_classes = options.similar_classes + (options.outgroup ? 1 : 0);

  // Class labels follow the four-leaf layout: the outgroup is class 2, the
  // similar classes are 1, 3, 4, ...
  std::vector<int> labels;
  for (int k = 0; k < total_classes; ++k) labels.push_back(k + 1);

  int similar_seen = 0;
  for (int k = 0; k < total_classes; ++k) {
    const bool is_outgroup = options.outgroup && labels[static_cast<size_t>(k)] == 2;
    double alpha = 0.0, beta = 0.0;
    if (!is_outgroup) {
      const double phi = 2.0 * kPi * similar_seen / options.similar_classes;
      alpha = 0.13 * std::cos(phi);
      beta = 0.13 * std::sin(phi);
      ++similar_seen;
    }

    for (int s = 0; s < options.per_class; ++s) {
      constexpr int kNoiseHarmonics = 6;
      double eps[kNoiseHarmonics], phi[kNoiseHarmonics];
      const double noise_scale = options.noise * (is_outgroup ? 3.0 : 1.0);
      for (int h = 0; h < kNoiseHarmonics; ++h) {
        eps[h] = noise_scale * 0.12 / (h + 1.0) * gauss(rng);
        phi[h] = phase(rng);
      }

      PlanarCurve c;
      c.closed = false;
      c.points.resize(2, options.points);
      c.label = labels[static_cast<size_t>(k)];
      c.id = "c" + std::to_string(labels[static_cast<size_t>(k)]) + "_" +
             std::to_string(s);
      for (int i = 0; i < options.points; ++i) {
        const double t = static_cast<double>(i) / (options.points - 1);
        double y = 0.45 * std::sin(kPi * t);
        if (is_outgroup)
          y += 0.55 * std::sin(6.0 * kPi * t);
        else
          y += alpha * std::sin(2.0 * kPi * t) + beta * std::sin(3.0 * kPi * t);
        for (int h = 0; h < kNoiseHarmonics; ++h)
          y += eps[h] * std::sin((h + 1) * kPi * t + phi[h]);
        c.points.col(i) << t, y;
      }
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace synthetic
}  // namespace srvf
