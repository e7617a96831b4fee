#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "srvf/classify.hpp"
#include "srvf/curve.hpp"

namespace srvf {
namespace expt {

struct ExperimentConfig {
  int m = 100;                 // resampling points
  std::vector<cls::ClassifierSpec> specs;
  int splits = 25;
  int train_per_class = 40;
  std::uint64_t seed = 1;
  int seed_stride = 1;         // closed-curve start-point search stride
  bool average_over_r = false;
  Exec exec = Exec::Parallel;
  bool log_progress = false;   // per-split timing on stderr
};

struct ResultRow {
  std::string method;  // SS | SP-OS | SP-REC | PP-OS | PP-REC
  std::string model;   // LDA | QDA
  int r = 0;           // 0 in average-over-r summaries
  std::vector<double> split_rates;  // percent, one per split
  double mean_rate = 0.0;
  double std_error = 0.0;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  int n_splits = 0;
};

/// Balanced draw: the first train_per_class shuffled members of each class
/// train, the remainder test. Partitions are disjoint and exhaustive.
std::pair<std::vector<size_t>, std::vector<size_t>> balanced_split(
    const std::map<int, std::vector<size_t>>& by_class, int train_per_class,
    std::mt19937_64& rng);

/// Random balanced splits, training sweep and per-spec misclassification
/// percentages. Deterministic for a fixed seed.
ResultTable run_experiment(const std::vector<PlanarCurve>& curves,
                           const ExperimentConfig& config);

/// CSV `method,model,r,mean_rate,stderr,n_splits`, 4 decimal places, rows
/// ordered by method, then model, then r.
void emit_table(const ResultTable& table, const std::string& path);

}  // namespace expt
}  // namespace srvf
