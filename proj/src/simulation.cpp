#include "srvf/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "srvf/errors.hpp"
#include "srvf/mathfn.hpp"

namespace srvf {
namespace sim {

namespace {

constexpr double kCdfClamp = 1e-15;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 on the combined value; decorrelates per-stream generators.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::vector<double> draw_t(int n, double mu, double nu, std::uint64_t stream_seed) {
  std::mt19937_64 rng(stream_seed);
  std::student_t_distribution<double> t(nu);
  std::vector<double> out(static_cast<size_t>(n));
  for (auto& v : out) v = mu + t(rng);
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::vector<double> transform_all(const std::vector<double>& y, double q,
                                  double nu) {
  std::vector<double> x(y.size());
  for (size_t i = 0; i < y.size(); ++i) x[i] = transform(y[i], q, nu);
  return x;
}

// Two-class misclassification of the nearest-transformed-mean rule with the
// transform centered at q.
double pair_rate(const std::vector<double>& ya, const std::vector<double>& yb,
                 double q, double nu) {
  const std::vector<double> xa = transform_all(ya, q, nu);
  const std::vector<double> xb = transform_all(yb, q, nu);
  const double ma = mean_of(xa), mb = mean_of(xb);
  std::int64_t wrong = 0;
  for (double x : xa)
    if (std::fabs(x - ma) > std::fabs(x - mb)) ++wrong;
  for (double x : xb)
    if (std::fabs(x - mb) >= std::fabs(x - ma)) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(xa.size() + xb.size());
}

// Three-class misclassification, single transform center.
double overall_rate(const std::array<std::vector<double>, 3>& y, double q,
                    double nu) {
  std::array<std::vector<double>, 3> x;
  std::vector<double> means(3);
  for (int k = 0; k < 3; ++k) {
    x[k] = transform_all(y[k], q, nu);
    means[k] = mean_of(x[k]);
  }
  std::int64_t wrong = 0, total = 0;
  for (int k = 0; k < 3; ++k) {
    for (double v : x[k])
      if (nearest_mean(v, means) != k) ++wrong;
    total += static_cast<std::int64_t>(x[k].size());
  }
  return static_cast<double>(wrong) / static_cast<double>(total);
}

struct PairwiseSpaces {
  // spaces in order (0,1), (0,2), (1,2); scores.s[k] holds the LDA
  // log-likelihood of every sample (concatenated classes) for class k.
  std::array<std::array<std::vector<double>, 3>, 3> score;
  static constexpr std::array<std::array<int, 2>, 3> kPairs{{{0, 1}, {0, 2}, {1, 2}}};
};

PairwiseSpaces pairwise_scores(const std::array<std::vector<double>, 3>& y,
                               double nu) {
  const size_t n = y[0].size();
  PairwiseSpaces out;
  for (int s = 0; s < 3; ++s) {
    const auto [i, j] = PairwiseSpaces::kPairs[static_cast<size_t>(s)];
    double q = 0.0;
    for (double v : y[static_cast<size_t>(i)]) q += v;
    for (double v : y[static_cast<size_t>(j)]) q += v;
    q /= static_cast<double>(2 * n);

    std::array<std::vector<double>, 3> x;
    std::array<double, 3> means{};
    double pooled = 0.0;
    for (int k = 0; k < 3; ++k) {
      x[k] = transform_all(y[k], q, nu);
      means[k] = mean_of(x[k]);
      double ss = 0.0;
      for (double v : x[k]) ss += (v - means[k]) * (v - means[k]);
      pooled += ss / static_cast<double>(x[k].size() - 1);
    }
    pooled /= 3.0;

    const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi * pooled);
    for (int k = 0; k < 3; ++k) {
      auto& sc = out.score[static_cast<size_t>(s)][static_cast<size_t>(k)];
      sc.reserve(3 * n);
      for (int c = 0; c < 3; ++c)
        for (double v : x[c]) {
          const double d = v - means[k];
          sc.push_back(log_norm - 0.5 * d * d / pooled);
        }
    }
  }
  return out;
}

// (ii): argmax of the mean log-likelihood over the three pairwise spaces.
double pairwise_os_rate(const PairwiseSpaces& sp, size_t n) {
  std::int64_t wrong = 0;
  for (size_t idx = 0; idx < 3 * n; ++idx) {
    const int truth = static_cast<int>(idx / n);
    int best = 0;
    double best_score = -1e300;
    for (int k = 0; k < 3; ++k) {
      double m = 0.0;
      for (int s = 0; s < 3; ++s)
        m += sp.score[static_cast<size_t>(s)][static_cast<size_t>(k)][idx];
      if (m / 3.0 > best_score) {
        best_score = m / 3.0;
        best = k;
      }
    }
    if (best != truth) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(3 * n);
}

// (iv): drop the class with the smallest mean log-likelihood, re-aggregate
// over the remaining space, keep the survivor with the larger score.
double pairwise_rec_rate(const PairwiseSpaces& sp, size_t n) {
  std::int64_t wrong = 0;
  for (size_t idx = 0; idx < 3 * n; ++idx) {
    const int truth = static_cast<int>(idx / n);
    double mean_score[3];
    for (int k = 0; k < 3; ++k) {
      double m = 0.0;
      for (int s = 0; s < 3; ++s)
        m += sp.score[static_cast<size_t>(s)][static_cast<size_t>(k)][idx];
      mean_score[k] = m / 3.0;
    }
    int drop = 0;
    for (int k = 1; k < 3; ++k)
      if (mean_score[k] <= mean_score[drop]) drop = k;  // ties drop the largest
    int rem[2], ri = 0;
    for (int k = 0; k < 3; ++k)
      if (k != drop) rem[ri++] = k;
    // the single surviving space is the one whose pair misses `drop`
    const int space = drop == 0 ? 2 : (drop == 1 ? 1 : 0);
    const double s0 = sp.score[static_cast<size_t>(space)][static_cast<size_t>(rem[0])][idx];
    const double s1 = sp.score[static_cast<size_t>(space)][static_cast<size_t>(rem[1])][idx];
    const int pred = s1 > s0 ? rem[1] : rem[0];
    if (pred != truth) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(3 * n);
}

}  // namespace

double transform(double y, double q, double nu) {
  if (!std::isfinite(y)) throw NumericalError("transform: non-finite input");
  double f = mathfn::student_t_cdf(y - q, nu);
  f = std::clamp(f, kCdfClamp, 1.0 - kCdfClamp);
  return mathfn::normal_quantile(f);
}

int nearest_mean(double x, const std::vector<double>& means) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(means.size()); ++k)
    if (std::fabs(x - means[static_cast<size_t>(k)]) <
        std::fabs(x - means[static_cast<size_t>(best)]))
      best = k;
  return best;
}

QSensitivityResult run_q_sensitivity(const SimConfig& config) {
  if (config.n < 1) throw UsageError("simulation: n must be positive");

  std::array<std::vector<double>, 3> y;
  for (int k = 0; k < 3; ++k)
    y[k] = draw_t(config.n, config.mus[static_cast<size_t>(k)], config.nu,
                  mix_seed(config.seed, static_cast<std::uint64_t>(k)));

  std::vector<double> grid = config.q_grid;
  if (grid.empty()) {
    const double lo = *std::min_element(config.mus.begin(), config.mus.end()) - 2.0;
    const double hi = *std::max_element(config.mus.begin(), config.mus.end()) + 2.0;
    for (double q = lo; q <= hi + 1e-9; q += 0.25) grid.push_back(q);
  }

  QSensitivityResult res;
  constexpr std::array<std::array<int, 2>, 3> kPairs{{{0, 1}, {0, 2}, {1, 2}}};

  double overall = 0.0;
  for (int k = 0; k < 3; ++k) overall += mean_of(y[static_cast<size_t>(k)]);
  {
    // overall mean of the pooled data = mean of the class means (equal n)
    overall /= 3.0;
  }
  res.overall_mean = overall;

  // grid cells: 3 pairs x (grid + pairwise mean + overall mean)
  const size_t cells_per_pair = grid.size() + 2;
  std::vector<double> rates(3 * cells_per_pair);
  std::array<double, 3> pair_means{};
  for (int p = 0; p < 3; ++p) {
    const auto [i, j] = kPairs[static_cast<size_t>(p)];
    pair_means[static_cast<size_t>(p)] =
        0.5 * (mean_of(y[static_cast<size_t>(i)]) + mean_of(y[static_cast<size_t>(j)]));
  }

  par::for_index(static_cast<std::int64_t>(rates.size()), config.exec,
                 [&](std::int64_t cell) {
                   const int p = static_cast<int>(cell / cells_per_pair);
                   const size_t g = static_cast<size_t>(cell % cells_per_pair);
                   const auto [i, j] = kPairs[static_cast<size_t>(p)];
                   double q;
                   if (g < grid.size())
                     q = grid[g];
                   else if (g == grid.size())
                     q = pair_means[static_cast<size_t>(p)];
                   else
                     q = overall;
                   rates[static_cast<size_t>(cell)] =
                       pair_rate(y[static_cast<size_t>(i)],
                                 y[static_cast<size_t>(j)], q, config.nu);
                 });

  double agg = 0.0;
  for (int p = 0; p < 3; ++p) {
    const auto [i, j] = kPairs[static_cast<size_t>(p)];
    auto& summary = res.pairs[static_cast<size_t>(p)];
    summary.class_a = i + 1;
    summary.class_b = j + 1;
    summary.pairwise_mean = pair_means[static_cast<size_t>(p)];
    summary.rate_at_pairwise_mean =
        rates[static_cast<size_t>(p) * cells_per_pair + grid.size()];
    summary.rate_at_overall_mean =
        rates[static_cast<size_t>(p) * cells_per_pair + grid.size() + 1];
    agg += summary.rate_at_pairwise_mean;
    for (size_t g = 0; g < grid.size(); ++g)
      res.grid.push_back({i + 1, j + 1, grid[g],
                          rates[static_cast<size_t>(p) * cells_per_pair + g]});
  }
  res.aggregated_pairwise_rate = agg / 3.0;
  res.overall_mean_rate = overall_rate(y, overall, config.nu);
  return res;
}

MethodComparisonResult run_method_comparison(const SimConfig& config,
                                             int replicates, bool fixed_mus) {
  if (replicates < 1) throw UsageError("simulation: replicates must be positive");
  MethodComparisonResult res;
  res.replicates.resize(static_cast<size_t>(replicates));

  par::for_index(replicates, config.exec, [&](std::int64_t rep) {
    auto& out = res.replicates[static_cast<size_t>(rep)];
    const std::uint64_t base = mix_seed(config.seed, 1000003ull * (rep + 1));

    std::array<double, 3> mus;
    if (fixed_mus) {
      mus = config.mus;
    } else {
      std::mt19937_64 rng(mix_seed(base, 0));
      std::uniform_real_distribution<double> unif(0.0, 10.0);
      for (auto& m : mus) m = unif(rng);
    }
    out.mus = mus;

    std::array<std::vector<double>, 3> y;
    for (int k = 0; k < 3; ++k)
      y[k] = draw_t(config.n, mus[static_cast<size_t>(k)], config.nu,
                    mix_seed(base, static_cast<std::uint64_t>(k) + 1));

    std::array<double, 3> sample_means{};
    double overall = 0.0;
    for (int k = 0; k < 3; ++k) {
      sample_means[static_cast<size_t>(k)] = mean_of(y[static_cast<size_t>(k)]);
      overall += sample_means[static_cast<size_t>(k)];
    }
    overall /= 3.0;

    // (i) single transform at the overall mean
    out.rate_overall = overall_rate(y, overall, config.nu);

    // (iii) best of 21 candidates from the smallest to the largest mean
    const double lo = *std::min_element(sample_means.begin(), sample_means.end());
    const double hi = *std::max_element(sample_means.begin(), sample_means.end());
    double best = 1.0;
    for (int c = 0; c < 21; ++c) {
      const double q = lo + (hi - lo) * static_cast<double>(c) / 20.0;
      best = std::min(best, overall_rate(y, q, config.nu));
    }
    out.rate_best_single = best;

    // (ii) and (iv) share the pairwise spaces
    const PairwiseSpaces sp = pairwise_scores(y, config.nu);
    out.rate_pairwise_os = pairwise_os_rate(sp, y[0].size());
    out.rate_pairwise_rec = pairwise_rec_rate(sp, y[0].size());
  });
  return res;
}

void write_q_sensitivity_csv(const QSensitivityResult& result,
                             const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "pair,q,rate\n";
  char buf[128];
  for (const auto& g : result.grid) {
    std::snprintf(buf, sizeof buf, "%d-%d,%.6f,%.6f\n", g.class_a, g.class_b,
                  g.q, g.rate);
    out << buf;
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

void write_method_comparison_csv(const MethodComparisonResult& result,
                                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "replicate,rate_i,rate_ii,rate_iii,rate_iv\n";
  char buf[160];
  for (size_t i = 0; i < result.replicates.size(); ++i) {
    const auto& r = result.replicates[i];
    std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%.6f,%.6f\n", i,
                  r.rate_overall, r.rate_pairwise_os, r.rate_best_single,
                  r.rate_pairwise_rec);
    out << buf;
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

}  // namespace sim
}  // namespace srvf
