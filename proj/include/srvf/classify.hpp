#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "srvf/manifold.hpp"

namespace srvf {
namespace cls {

enum class Projection { Single, Pairwise };
enum class PcScope { Single, Pairwise };
enum class Decision { OneShot, Recursive };
enum class Model { Lda, Qda };

/// The SS / SP / PP x OS / REC x LDA / QDA taxonomy.
struct ClassifierSpec {
  Projection projection = Projection::Single;
  PcScope pc_scope = PcScope::Single;
  Decision decision = Decision::OneShot;
  Model model = Model::Qda;
  int r = 8;

  static ClassifierSpec ss(Model m, int r);
  static ClassifierSpec sp(Decision d, Model m, int r);
  static ClassifierSpec pp(Decision d, Model m, int r);

  void validate() const;  // SS/SP/PP constraints
  std::string method_name() const;  // "SS", "SP-OS", "SP-REC", "PP-OS", "PP-REC"
  std::string model_name() const;   // "LDA", "QDA"
};

/// Parses "SS", "SP-OS", "SP-REC", "PP-OS", "PP-REC" (case-insensitive);
/// model and r are filled in by the caller.
ClassifierSpec parse_method(const std::string& name);

struct GaussianClassModel {
  int class_id = 0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Sample mean and covariance (divisor n-1) with a small ridge when the
/// covariance is near singular.
GaussianClassModel fit_gaussian(const Eigen::MatrixXd& class_coords,
                                int class_id);

/// Gaussian log-density; `pooled` replaces the model covariance (LDA).
double log_likelihood(const Eigen::VectorXd& x, const GaussianClassModel& model,
                      const Eigen::MatrixXd* pooled = nullptr);

/// One tangent-space classification context: the PC basis built from the
/// defining pair's training data, with Gaussian models for all K classes.
struct PairwiseSpace {
  int class_i = -1;  // -1,-1 marks the single all-classes space (SS)
  int class_j = -1;
  int projection_index = 0;  // into TrainedClassifier::projections
  manifold::PcBasis basis;
  std::vector<GaussianClassModel> models;  // indexed like class_ids
  Eigen::MatrixXd pooled_covariance;       // empty unless LDA
};

struct TrainedClassifier {
  ClassifierSpec spec;
  std::vector<int> class_ids;     // sorted ascending
  std::vector<Srvf> projections;  // distinct projection points
  std::vector<PairwiseSpace> spaces;
  reg::RegisterOptions reg;

  int num_classes() const { return static_cast<int>(class_ids.size()); }
};

struct TrainOptions {
  manifold::MeanConfig mean;
};

struct ClassificationResult {
  int predicted = 0;                  // class id
  Eigen::VectorXd per_class_scores;   // stage-1 mean log-likelihoods
  std::vector<int> recursion_trace;   // dropped class ids, empty for OS
  std::vector<int> excluded_spaces;   // space indices skipped (antipodal)
};

/// Caches Karcher means, registrations and pairwise SVDs so a sweep over
/// specs trains each expensive structure once.
class Trainer {
 public:
  Trainer(std::vector<Srvf> shapes, std::vector<int> labels,
          TrainOptions options = {});
  ~Trainer();

  TrainedClassifier make(const ClassifierSpec& spec);
  const std::vector<int>& class_ids() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

TrainedClassifier train(const std::vector<Srvf>& shapes,
                        const std::vector<int>& labels,
                        const ClassifierSpec& spec,
                        const TrainOptions& options = {});

/// M x K per-space per-class log-likelihoods for one test shape (rows in
/// space order). Spaces whose registration fails are recorded in `excluded`
/// and get -inf rows.
Eigen::MatrixXd space_scores(const Srvf& x, const TrainedClassifier& c,
                             std::vector<int>* excluded = nullptr);

/// Aggregation rules, exposed for property tests. `pairs` holds each row's
/// defining class-index pair (or {-1,-1}).
int os_decide(const Eigen::MatrixXd& scores,
              const std::vector<char>& row_valid);
struct RecOutcome {
  int predicted_index = 0;
  std::vector<int> dropped_indices;
};
RecOutcome rec_decide(const Eigen::MatrixXd& scores,
                      const std::vector<std::pair<int, int>>& pairs,
                      const std::vector<char>& row_valid);

ClassificationResult classify_os(const Srvf& x, const TrainedClassifier& c);
ClassificationResult classify_rec(const Srvf& x, const TrainedClassifier& c);
/// Dispatches on spec.decision.
ClassificationResult classify(const Srvf& x, const TrainedClassifier& c);

std::vector<ClassificationResult> classify_batch(const std::vector<Srvf>& xs,
                                                 const TrainedClassifier& c,
                                                 Exec exec = Exec::Parallel);

}  // namespace cls
}  // namespace srvf
