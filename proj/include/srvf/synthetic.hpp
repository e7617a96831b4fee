#pragma once

#include <cstdint>
#include <vector>

#include "srvf/curve.hpp"

namespace srvf {
namespace synthetic {

/// Benchmark with `similar_classes` nearby classes (labels 1, 3, 4, ...) and
/// an engineered outgroup labeled 2, mirroring the four-species leaf setup.
/// Curves are open, built from direction-angle Fourier series; class
/// identity lives in the low harmonics, sample noise spreads over higher
/// ones.
struct BenchmarkOptions {
  int similar_classes = 3;
  int per_class = 60;
  int points = 120;
  double noise = 0.25;
  bool outgroup = true;
  std::uint64_t seed = 7;
};

std::vector<PlanarCurve> make_benchmark(const BenchmarkOptions& options = {});

/// Simple parametric shapes used in tests and demos.
PlanarCurve circle(int m, double radius = 1.0);
PlanarCurve square(int m);
PlanarCurve segment(int m, double angle = 0.0);

/// Smooth random closed or open curve from a low-frequency Fourier series.
PlanarCurve random_smooth_curve(std::uint64_t seed, int m, bool closed,
                                int harmonics = 3, double amplitude = 0.35);

}  // namespace synthetic
}  // namespace srvf
