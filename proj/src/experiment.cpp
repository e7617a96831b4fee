#include "srvf/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "srvf/errors.hpp"

namespace srvf {
namespace expt {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

int method_rank(const std::string& m) {
  if (m == "SS") return 0;
  if (m == "SP-OS") return 1;
  if (m == "SP-REC") return 2;
  if (m == "PP-OS") return 3;
  return 4;  // PP-REC
}

struct TrainKey {
  cls::Projection projection;
  cls::PcScope pc_scope;
  cls::Model model;
  int r;
  auto tie() const { return std::tuple(projection, pc_scope, model, r); }
  bool operator<(const TrainKey& o) const { return tie() < o.tie(); }
};

}  // namespace

std::pair<std::vector<size_t>, std::vector<size_t>> balanced_split(
    const std::map<int, std::vector<size_t>>& by_class, int train_per_class,
    std::mt19937_64& rng) {
  std::vector<size_t> train_idx, test_idx;
  for (const auto& [cid, members] : by_class) {
    std::vector<size_t> shuffled = members;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    train_idx.insert(train_idx.end(), shuffled.begin(),
                     shuffled.begin() + train_per_class);
    test_idx.insert(test_idx.end(), shuffled.begin() + train_per_class,
                    shuffled.end());
  }
  return {train_idx, test_idx};
}

ResultTable run_experiment(const std::vector<PlanarCurve>& curves,
                           const ExperimentConfig& config) {
  if (config.splits < 1) throw UsageError("experiment: splits must be >= 1");
  if (config.train_per_class < 2)
    throw UsageError("experiment: train-per-class must be >= 2");
  if (config.specs.empty()) throw UsageError("experiment: no classifier specs");
  for (const auto& s : config.specs) s.validate();

  // Preprocess every curve once: normalize, resample, SRVF.
  std::vector<Srvf> shapes(curves.size());
  std::vector<int> labels(curves.size());
  for (size_t i = 0; i < curves.size(); ++i) {
    if (!curves[i].label)
      throw DataError("experiment: shape '" + curves[i].id + "' is unlabeled");
    labels[i] = *curves[i].label;
  }
  par::for_index(static_cast<std::int64_t>(curves.size()), config.exec,
                 [&](std::int64_t i) {
                   shapes[i] = to_srvf(
                       resample_arclength(normalize(curves[i]), config.m));
                 });

  std::map<int, std::vector<size_t>> by_class;
  for (size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  for (const auto& [cid, members] : by_class)
    if (static_cast<int>(members.size()) < config.train_per_class + 1)
      throw DataError("experiment: class " + std::to_string(cid) + " has " +
                      std::to_string(members.size()) +
                      " samples; need train_per_class + 1 = " +
                      std::to_string(config.train_per_class + 1));

  // One trained classifier covers both decisions; group the sweep.
  std::vector<TrainKey> train_keys;
  for (const auto& s : config.specs) {
    const TrainKey key{s.projection, s.pc_scope, s.model, s.r};
    if (std::find_if(train_keys.begin(), train_keys.end(), [&](const TrainKey& k) {
          return !(k < key) && !(key < k);
        }) == train_keys.end())
      train_keys.push_back(key);
  }

  // rate[spec][split]
  std::vector<std::vector<double>> rates(config.specs.size(),
                                         std::vector<double>(config.splits, 0.0));

  for (int split = 0; split < config.splits; ++split) {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(mix_seed(config.seed, static_cast<std::uint64_t>(split)));
    const auto [train_idx, test_idx] =
        balanced_split(by_class, config.train_per_class, rng);

    std::vector<Srvf> train_shapes;
    std::vector<int> train_labels;
    for (size_t i : train_idx) {
      train_shapes.push_back(shapes[i]);
      train_labels.push_back(labels[i]);
    }
    std::vector<Srvf> test_shapes;
    std::vector<int> test_labels;
    for (size_t i : test_idx) {
      test_shapes.push_back(shapes[i]);
      test_labels.push_back(labels[i]);
    }

    cls::TrainOptions topts;
    topts.mean.seed = mix_seed(config.seed, 0x5eed0000ull + static_cast<std::uint64_t>(split));
    topts.mean.reg.seed_stride = config.seed_stride;
    topts.mean.exec = config.exec;
    cls::Trainer trainer(train_shapes, train_labels, topts);

    for (const auto& key : train_keys) {
      cls::ClassifierSpec spec;
      spec.projection = key.projection;
      spec.pc_scope = key.pc_scope;
      spec.model = key.model;
      spec.r = key.r;
      spec.decision = cls::Decision::OneShot;
      const cls::TrainedClassifier classifier = trainer.make(spec);

      // Score every test shape once; both decisions reuse the scores.
      const auto n_test = static_cast<std::int64_t>(test_shapes.size());
      std::vector<int> pred_os(test_shapes.size());
      std::vector<int> pred_rec(test_shapes.size());
      const bool pairwise = spec.pc_scope == cls::PcScope::Pairwise;
      par::for_index(n_test, config.exec, [&](std::int64_t i) {
        std::vector<int> excluded;
        const Eigen::MatrixXd scores =
            cls::space_scores(test_shapes[static_cast<size_t>(i)], classifier,
                              &excluded);
        std::vector<char> valid(classifier.spaces.size(), 1);
        for (int s : excluded) valid[static_cast<size_t>(s)] = 0;
        pred_os[static_cast<size_t>(i)] =
            classifier.class_ids[static_cast<size_t>(cls::os_decide(scores, valid))];
        if (pairwise) {
          std::vector<std::pair<int, int>> pairs;
          for (const auto& s : classifier.spaces)
            pairs.emplace_back(s.class_i, s.class_j);
          pred_rec[static_cast<size_t>(i)] = classifier.class_ids[static_cast<size_t>(
              cls::rec_decide(scores, pairs, valid).predicted_index)];
        }
      });

      for (size_t sp = 0; sp < config.specs.size(); ++sp) {
        const auto& s = config.specs[sp];
        if (std::tuple(s.projection, s.pc_scope, s.model, s.r) != key.tie())
          continue;
        const auto& pred =
            s.decision == cls::Decision::Recursive ? pred_rec : pred_os;
        int wrong = 0;
        for (size_t i = 0; i < test_labels.size(); ++i)
          if (pred[i] != test_labels[i]) ++wrong;
        rates[sp][static_cast<size_t>(split)] =
            100.0 * wrong / static_cast<double>(test_labels.size());
      }
    }

    if (config.log_progress) {
      const auto dt = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
      std::fprintf(stderr, "split %d/%d done in %lld ms\n", split + 1,
                   config.splits, static_cast<long long>(dt));
    }
  }

  ResultTable table;
  table.n_splits = config.splits;
  for (size_t sp = 0; sp < config.specs.size(); ++sp) {
    const auto& s = config.specs[sp];
    ResultRow row;
    row.method = s.method_name();
    row.model = s.model_name();
    row.r = s.r;
    row.split_rates = rates[sp];
    table.rows.push_back(std::move(row));
  }

  if (config.average_over_r) {
    // Table-1 style summary: average the per-split rate over the r sweep.
    std::map<std::pair<std::string, std::string>, std::vector<std::vector<double>>>
        grouped;
    for (const auto& row : table.rows)
      grouped[{row.method, row.model}].push_back(row.split_rates);
    ResultTable summary;
    summary.n_splits = config.splits;
    for (const auto& [key, group] : grouped) {
      ResultRow row;
      row.method = key.first;
      row.model = key.second;
      row.r = 0;
      row.split_rates.assign(config.splits, 0.0);
      for (const auto& rates_r : group)
        for (int i = 0; i < config.splits; ++i)
          row.split_rates[static_cast<size_t>(i)] +=
              rates_r[static_cast<size_t>(i)] / static_cast<double>(group.size());
      summary.rows.push_back(std::move(row));
    }
    table = std::move(summary);
  }

  for (auto& row : table.rows) {
    const double n = static_cast<double>(row.split_rates.size());
    row.mean_rate =
        std::accumulate(row.split_rates.begin(), row.split_rates.end(), 0.0) / n;
    if (row.split_rates.size() > 1) {
      double ss = 0.0;
      for (double v : row.split_rates)
        ss += (v - row.mean_rate) * (v - row.mean_rate);
      row.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
  }

  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [](const ResultRow& a, const ResultRow& b) {
                     return std::tuple(method_rank(a.method), a.model, a.r) <
                            std::tuple(method_rank(b.method), b.model, b.r);
                   });
  return table;
}

void emit_table(const ResultTable& table, const std::string& path) {
  if (table.rows.empty()) throw DataError("emit_table: empty table");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "method,model,r,mean_rate,stderr,n_splits\n";
  char buf[160];
  for (const auto& row : table.rows) {
    const std::string r_str = row.r == 0 ? "all" : std::to_string(row.r);
    std::snprintf(buf, sizeof buf, "%s,%s,%s,%.4f,%.4f,%d\n",
                  row.method.c_str(), row.model.c_str(), r_str.c_str(),
                  row.mean_rate, row.std_error, table.n_splits);
    out << buf;
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

}  // namespace expt
}  // namespace srvf
