#pragma once

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "srvf/curve.hpp"
#include "srvf/registration.hpp"
#include "srvf/synthetic.hpp"

namespace testutil {

// Unit-norm SRVF of a random smooth curve.
inline srvf::Srvf random_srvf(std::uint64_t seed, int m, bool closed,
                              int harmonics = 3, double amplitude = 0.35) {
  const auto c = srvf::synthetic::random_smooth_curve(seed, 4 * m, closed,
                                                      harmonics, amplitude);
  return srvf::to_srvf(srvf::resample_arclength(srvf::normalize(c), m));
}

inline srvf::Srvf srvf_of(const srvf::PlanarCurve& c, int m) {
  return srvf::to_srvf(srvf::resample_arclength(srvf::normalize(c), m));
}

// Smooth random warp: gamma' proportional to exp of a low-frequency field.
inline srvf::reg::Reparam random_smooth_gamma(std::uint64_t seed,
                                              Eigen::Index n,
                                              double strength = 0.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const double a = strength * gauss(rng), b = strength * gauss(rng);
  const double c = 0.5 * strength * gauss(rng);
  srvf::reg::Reparam g;
  g.knots.resize(n);
  g.knots(0) = 0.0;
  constexpr double pi = 3.14159265358979323846;
  for (Eigen::Index i = 1; i < n; ++i) {
    const double t = (static_cast<double>(i) - 0.5) / static_cast<double>(n - 1);
    g.knots(i) = g.knots(i - 1) +
                 std::exp(a * std::sin(2 * pi * t) + b * std::cos(2 * pi * t) +
                          c * std::sin(4 * pi * t));
  }
  g.knots /= g.knots(n - 1);
  g.knots(n - 1) = 1.0;
  return g;
}

class TempFile {
 public:
  explicit TempFile(const std::string& contents, const std::string& ext = ".csv") {
    static int counter = 0;
    path_ = (std::filesystem::temp_directory_path() /
             ("srvf_test_" + std::to_string(::getpid()) + "_" +
              std::to_string(counter++) + ext))
                .string();
    std::ofstream out(path_);
    out << contents;
  }
  ~TempFile() { std::remove(path_.c_str()); }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

inline std::string temp_path(const std::string& ext) {
  static int counter = 0;
  return (std::filesystem::temp_directory_path() /
          ("srvf_out_" + std::to_string(::getpid()) + "_" +
           std::to_string(counter++) + ext))
      .string();
}

}  // namespace testutil
