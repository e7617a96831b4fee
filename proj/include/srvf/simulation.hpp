#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "srvf/parallel.hpp"

namespace srvf {
namespace sim {

struct SimConfig {
  std::array<double, 3> mus{0.0, 2.0, 6.0};
  double nu = 5.0;
  int n = 20000;               // samples per class; 100000 for full fidelity
  std::vector<double> q_grid;  // empty = built from the class locations
  std::uint64_t seed = 1;
  Exec exec = Exec::Parallel;
};

/// x = Phi^{-1}(F(y - q)), F the t_nu(0) CDF; contracts the tails around q.
double transform(double y, double q, double nu = 5.0);

/// Nearest-mean label indices for 1-D samples; ties go to the first mean.
int nearest_mean(double x, const std::vector<double>& means);

struct QSensitivityResult {
  struct GridPoint {
    int class_a = 0, class_b = 0;  // 1-based, as in the tables
    double q = 0.0;
    double rate = 0.0;
  };
  std::vector<GridPoint> grid;

  struct PairSummary {
    int class_a = 0, class_b = 0;
    double pairwise_mean = 0.0;       // transform center
    double rate_at_pairwise_mean = 0.0;
    double rate_at_overall_mean = 0.0;
  };
  std::array<PairSummary, 3> pairs;

  double overall_mean = 0.0;
  double aggregated_pairwise_rate = 0.0;  // mean of the red-point rates
  double overall_mean_rate = 0.0;         // 3-class rate, single transform
};

/// The q-grid study behind Figure 5 and the 0.09-vs-0.17 comparison.
QSensitivityResult run_q_sensitivity(const SimConfig& config);

struct MethodComparisonResult {
  struct Replicate {
    std::array<double, 3> mus;
    double rate_overall = 0.0;       // (i) single transform at the overall mean
    double rate_pairwise_os = 0.0;   // (ii) pairwise LDA, one-shot
    double rate_best_single = 0.0;   // (iii) best of 21 candidate centers
    double rate_pairwise_rec = 0.0;  // (iv) pairwise LDA, recursive
  };
  std::vector<Replicate> replicates;
};

/// Four-method comparison with random class locations (Figure 6). When
/// `fixed_mus` is set the drawn locations are replaced by config.mus.
MethodComparisonResult run_method_comparison(const SimConfig& config,
                                             int replicates,
                                             bool fixed_mus = false);

void write_q_sensitivity_csv(const QSensitivityResult& result,
                             const std::string& path);
void write_method_comparison_csv(const MethodComparisonResult& result,
                                 const std::string& path);

}  // namespace sim
}  // namespace srvf
