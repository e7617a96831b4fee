#include "srvf/classify.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "srvf/errors.hpp"

namespace srvf {
namespace cls {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

ClassifierSpec ClassifierSpec::ss(Model m, int r) {
  return {Projection::Single, PcScope::Single, Decision::OneShot, m, r};
}
ClassifierSpec ClassifierSpec::sp(Decision d, Model m, int r) {
  return {Projection::Single, PcScope::Pairwise, d, m, r};
}
ClassifierSpec ClassifierSpec::pp(Decision d, Model m, int r) {
  return {Projection::Pairwise, PcScope::Pairwise, d, m, r};
}

void ClassifierSpec::validate() const {
  if (pc_scope == PcScope::Single && projection == Projection::Pairwise)
    throw UsageError("spec: pairwise projections require pairwise PCs");
  if (pc_scope == PcScope::Single && decision == Decision::Recursive)
    throw UsageError("spec: the recursive decision needs pairwise PC spaces");
  if (r < 1) throw UsageError("spec: r must be positive");
}

std::string ClassifierSpec::method_name() const {
  if (pc_scope == PcScope::Single) return "SS";
  const std::string head = projection == Projection::Single ? "SP" : "PP";
  return head + (decision == Decision::OneShot ? "-OS" : "-REC");
}

std::string ClassifierSpec::model_name() const {
  return model == Model::Lda ? "LDA" : "QDA";
}

ClassifierSpec parse_method(const std::string& name) {
  std::string up;
  for (char ch : name) up.push_back(static_cast<char>(std::toupper(ch)));
  if (up == "SS" || up == "SS-OS") return ClassifierSpec::ss(Model::Qda, 8);
  if (up == "SP-OS") return ClassifierSpec::sp(Decision::OneShot, Model::Qda, 8);
  if (up == "SP-REC") return ClassifierSpec::sp(Decision::Recursive, Model::Qda, 8);
  if (up == "PP-OS") return ClassifierSpec::pp(Decision::OneShot, Model::Qda, 8);
  if (up == "PP-REC") return ClassifierSpec::pp(Decision::Recursive, Model::Qda, 8);
  throw UsageError("unknown method '" + name +
                   "' (SS|SP-OS|SP-REC|PP-OS|PP-REC)");
}

GaussianClassModel fit_gaussian(const Eigen::MatrixXd& class_coords,
                                int class_id) {
  const Eigen::Index n = class_coords.rows();
  const Eigen::Index r = class_coords.cols();
  if (n < 2) throw DataError("fit_gaussian: class " + std::to_string(class_id) +
                             " has fewer than 2 samples");
  GaussianClassModel g;
  g.class_id = class_id;
  g.mean = class_coords.colwise().mean();
  const Eigen::MatrixXd centered = class_coords.rowwise() - g.mean.transpose();
  g.covariance = centered.transpose() * centered / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.covariance,
                                                    Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < 1e-8) {
    const double trace = g.covariance.trace();
    const double tau =
        trace > 0.0 ? 1e-8 * trace / static_cast<double>(r) : 1e-8;
    g.covariance += tau * Eigen::MatrixXd::Identity(r, r);
  }
  return g;
}

double log_likelihood(const Eigen::VectorXd& x, const GaussianClassModel& model,
                      const Eigen::MatrixXd* pooled) {
  if (!x.allFinite()) throw NumericalError("log_likelihood: non-finite input");
  const Eigen::MatrixXd& sigma = pooled ? *pooled : model.covariance;
  const auto r = static_cast<double>(x.size());
  Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma);
  if (ldlt.info() != Eigen::Success)
    throw NumericalError("log_likelihood: covariance not factorizable");
  const double logdet = ldlt.vectorD().array().log().sum();
  const Eigen::VectorXd d = x - model.mean;
  const double quad = d.dot(ldlt.solve(d));
  return -0.5 * (r * std::log(2.0 * std::numbers::pi) + logdet) - 0.5 * quad;
}

// ---------------------------------------------------------------------------
// Training

struct Trainer::Impl {
  std::vector<Srvf> shapes;
  std::vector<int> labels;            // class indices 0..K-1
  std::vector<int> class_ids;         // sorted original labels
  TrainOptions options;

  // key: sorted class-index subset defining the mean
  std::map<std::vector<int>, manifold::KarcherMean> means;
  // tangent rows for ALL training shapes at the subset's mean
  std::map<std::vector<int>, Eigen::MatrixXd> rows;
  // full-rank PCA per (mean subset, basis subset); sliced per requested r
  std::map<std::pair<std::vector<int>, std::vector<int>>, manifold::PcBasis>
      bases;

  std::vector<int> all_key() const {
    std::vector<int> k(class_ids.size());
    for (size_t i = 0; i < k.size(); ++i) k[i] = static_cast<int>(i);
    return k;
  }

  const manifold::KarcherMean& mean_for(const std::vector<int>& key) {
    auto it = means.find(key);
    if (it != means.end()) return it->second;

    std::vector<Srvf> subset;
    for (size_t i = 0; i < shapes.size(); ++i)
      if (std::binary_search(key.begin(), key.end(), labels[i]))
        subset.push_back(shapes[i]);
    auto km = manifold::karcher_mean(subset, options.mean);
    return means.emplace(key, std::move(km)).first->second;
  }

  const Eigen::MatrixXd& rows_for(const std::vector<int>& key) {
    auto it = rows.find(key);
    if (it != rows.end()) return it->second;

    const auto& km = mean_for(key);
    const auto n = static_cast<Eigen::Index>(shapes.size());
    Eigen::MatrixXd v(n, 2 * km.mean.size());
    // Shapes that entered the mean are already aligned; register the rest.
    std::vector<Eigen::Index> member_slot(shapes.size(),
                                          static_cast<Eigen::Index>(-1));
    Eigen::Index slot = 0;
    for (size_t i = 0; i < shapes.size(); ++i)
      if (std::binary_search(key.begin(), key.end(), labels[i]))
        member_slot[i] = slot++;

    par::for_index(n, options.mean.exec, [&](std::int64_t i) {
      Srvf aligned;
      if (member_slot[i] >= 0) {
        aligned = km.aligned_samples[member_slot[i]];
      } else {
        const auto a = reg::register_pair(km.mean, shapes[i], options.mean.reg);
        aligned = reg::apply_alignment(shapes[i], a);
      }
      v.row(i) =
          manifold::flatten(manifold::log_map(km.mean, aligned)).transpose();
    });
    return rows.emplace(key, std::move(v)).first->second;
  }

  // Basis over `basis_key` classes' rows at the `mean_key` mean, full rank.
  const manifold::PcBasis& basis_for(const std::vector<int>& mean_key,
                                     const std::vector<int>& basis_key) {
    const auto cache_key = std::make_pair(mean_key, basis_key);
    auto it = bases.find(cache_key);
    if (it != bases.end()) return it->second;

    const auto& all_rows = rows_for(mean_key);
    std::vector<Eigen::Index> members;
    for (size_t i = 0; i < shapes.size(); ++i)
      if (std::binary_search(basis_key.begin(), basis_key.end(), labels[i]))
        members.push_back(static_cast<Eigen::Index>(i));
    Eigen::MatrixXd sub(members.size(), all_rows.cols());
    for (size_t i = 0; i < members.size(); ++i) sub.row(i) = all_rows.row(members[i]);

    const int full_r = static_cast<int>(
        std::min<Eigen::Index>(sub.rows() - 1, sub.cols()));
    auto basis = manifold::tpca(sub, full_r, mean_for(mean_key).mean);
    return bases.emplace(cache_key, std::move(basis)).first->second;
  }
};

Trainer::Trainer(std::vector<Srvf> shapes, std::vector<int> labels,
                 TrainOptions options)
    : impl_(std::make_unique<Impl>()) {
  if (shapes.size() != labels.size())
    throw UsageError("train: shapes and labels differ in length");
  if (shapes.empty()) throw DataError("train: no training shapes");

  std::set<int> ids(labels.begin(), labels.end());
  impl_->class_ids.assign(ids.begin(), ids.end());
  if (impl_->class_ids.size() < 2)
    throw DataError("train: need at least 2 classes");

  std::map<int, int> index_of;
  for (size_t i = 0; i < impl_->class_ids.size(); ++i)
    index_of[impl_->class_ids[i]] = static_cast<int>(i);

  std::vector<int> counts(impl_->class_ids.size(), 0);
  impl_->labels.resize(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) {
    impl_->labels[i] = index_of.at(labels[i]);
    ++counts[impl_->labels[i]];
  }
  for (size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] < 2)
      throw DataError("train: class " + std::to_string(impl_->class_ids[k]) +
                      " has fewer than 2 training samples");
    if (counts[k] != counts[0])
      throw DataError("train: unbalanced classes (class " +
                      std::to_string(impl_->class_ids[k]) + " has " +
                      std::to_string(counts[k]) + " samples, class " +
                      std::to_string(impl_->class_ids[0]) + " has " +
                      std::to_string(counts[0]) + ")");
  }
  impl_->shapes = std::move(shapes);
  impl_->options = options;
}

Trainer::~Trainer() = default;

const std::vector<int>& Trainer::class_ids() const { return impl_->class_ids; }

TrainedClassifier Trainer::make(const ClassifierSpec& spec) {
  spec.validate();
  auto& im = *impl_;
  const int k_classes = static_cast<int>(im.class_ids.size());

  TrainedClassifier out;
  out.spec = spec;
  out.class_ids = im.class_ids;
  out.reg = im.options.mean.reg;

  struct SpaceKey {
    std::vector<int> mean_key, basis_key;
    int class_i, class_j;
  };
  std::vector<SpaceKey> keys;
  const auto all = im.all_key();
  if (spec.pc_scope == PcScope::Single) {
    keys.push_back({all, all, -1, -1});
  } else {
    for (int i = 0; i < k_classes; ++i)
      for (int j = i + 1; j < k_classes; ++j) {
        const std::vector<int> pair{i, j};
        keys.push_back({spec.projection == Projection::Single ? all : pair,
                        pair, i, j});
      }
  }

  std::map<std::vector<int>, int> proj_index_by_key;
  for (const auto& key : keys) {
    PairwiseSpace space;
    space.class_i = key.class_i;
    space.class_j = key.class_j;

    auto found = proj_index_by_key.find(key.mean_key);
    if (found == proj_index_by_key.end()) {
      out.projections.push_back(im.mean_for(key.mean_key).mean);
      found = proj_index_by_key
                  .emplace(key.mean_key, static_cast<int>(out.projections.size()) - 1)
                  .first;
    }
    space.projection_index = found->second;

    const auto& full = im.basis_for(key.mean_key, key.basis_key);
    if (spec.r > full.r)
      throw UsageError("train: r=" + std::to_string(spec.r) +
                       " exceeds the rank budget " + std::to_string(full.r) +
                       " of the pairwise training data");
    space.basis.base = full.base;
    space.basis.r = spec.r;
    space.basis.directions = full.directions.leftCols(spec.r);
    space.basis.variances = full.variances.head(spec.r);
    space.basis.basis_id = full.basis_id ^ static_cast<std::uint64_t>(spec.r);

    const auto& rows = im.rows_for(key.mean_key);
    const Eigen::MatrixXd coords = rows * space.basis.directions;

    space.models.reserve(k_classes);
    for (int k = 0; k < k_classes; ++k) {
      std::vector<Eigen::Index> members;
      for (size_t i = 0; i < im.shapes.size(); ++i)
        if (im.labels[i] == k) members.push_back(static_cast<Eigen::Index>(i));
      Eigen::MatrixXd class_coords(members.size(), spec.r);
      for (size_t i = 0; i < members.size(); ++i)
        class_coords.row(i) = coords.row(members[i]);
      space.models.push_back(fit_gaussian(class_coords, im.class_ids[k]));
    }

    if (spec.model == Model::Lda) {
      Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(spec.r, spec.r);
      for (const auto& g : space.models) pooled += g.covariance;
      space.pooled_covariance = pooled / static_cast<double>(k_classes);
    }
    out.spaces.push_back(std::move(space));
  }
  return out;
}

TrainedClassifier train(const std::vector<Srvf>& shapes,
                        const std::vector<int>& labels,
                        const ClassifierSpec& spec, const TrainOptions& options) {
  Trainer trainer(shapes, labels, options);
  return trainer.make(spec);
}

// ---------------------------------------------------------------------------
// Classification

Eigen::MatrixXd space_scores(const Srvf& x, const TrainedClassifier& c,
                             std::vector<int>* excluded) {
  const int k_classes = c.num_classes();
  const auto n_spaces = static_cast<Eigen::Index>(c.spaces.size());
  Eigen::MatrixXd scores(n_spaces, k_classes);

  // One registration and log map per distinct projection point.
  std::vector<Eigen::VectorXd> tangent_rows(c.projections.size());
  std::vector<char> proj_ok(c.projections.size(), 1);
  for (size_t p = 0; p < c.projections.size(); ++p) {
    try {
      const auto a = reg::register_pair(c.projections[p], x, c.reg);
      const Srvf aligned = reg::apply_alignment(x, a);
      tangent_rows[p] =
          manifold::flatten(manifold::log_map(c.projections[p], aligned));
    } catch (const NumericalError&) {
      proj_ok[p] = 0;
    }
  }

  for (Eigen::Index s = 0; s < n_spaces; ++s) {
    const auto& space = c.spaces[s];
    if (!proj_ok[space.projection_index]) {
      scores.row(s).setConstant(kNegInf);
      if (excluded) excluded->push_back(static_cast<int>(s));
      continue;
    }
    const Eigen::VectorXd coord =
        space.basis.directions.transpose() * tangent_rows[space.projection_index];
    const Eigen::MatrixXd* pooled =
        c.spec.model == Model::Lda ? &space.pooled_covariance : nullptr;
    for (int k = 0; k < k_classes; ++k)
      scores(s, k) = log_likelihood(coord, space.models[k], pooled);
  }
  return scores;
}

int os_decide(const Eigen::MatrixXd& scores, const std::vector<char>& row_valid) {
  const Eigen::Index k_classes = scores.cols();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(k_classes);
  int used = 0;
  for (Eigen::Index s = 0; s < scores.rows(); ++s) {
    if (!row_valid[static_cast<size_t>(s)]) continue;
    mean += scores.row(s).transpose();
    ++used;
  }
  if (used == 0) throw NumericalError("classify: no usable spaces");
  mean /= static_cast<double>(used);

  int best = 0;
  for (int k = 1; k < k_classes; ++k)
    if (mean(k) > mean(best)) best = k;  // ties keep the smallest index
  return best;
}

RecOutcome rec_decide(const Eigen::MatrixXd& scores,
                      const std::vector<std::pair<int, int>>& pairs,
                      const std::vector<char>& row_valid) {
  const int k_classes = static_cast<int>(scores.cols());
  std::vector<char> alive(k_classes, 1);
  RecOutcome out;

  for (int stage = 0; stage + 1 < k_classes; ++stage) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(k_classes);
    int used = 0;
    for (Eigen::Index s = 0; s < scores.rows(); ++s) {
      if (!row_valid[static_cast<size_t>(s)]) continue;
      const auto& [i, j] = pairs[static_cast<size_t>(s)];
      if (!alive[i] || !alive[j]) continue;
      mean += scores.row(s).transpose();
      ++used;
    }
    if (used == 0) throw NumericalError("classify: no usable spaces at stage " +
                                        std::to_string(stage + 1));
    mean /= static_cast<double>(used);

    int drop = -1;
    for (int k = 0; k < k_classes; ++k) {
      if (!alive[k]) continue;
      if (drop < 0 || mean(k) <= mean(drop)) drop = k;  // ties drop the largest
    }
    alive[drop] = 0;
    out.dropped_indices.push_back(drop);
  }

  for (int k = 0; k < k_classes; ++k)
    if (alive[k]) out.predicted_index = k;
  return out;
}

namespace {

ClassificationResult finish_result(const TrainedClassifier& c,
                                   const Eigen::MatrixXd& scores,
                                   const std::vector<int>& excluded) {
  ClassificationResult res;
  res.excluded_spaces = excluded;
  std::vector<char> valid(c.spaces.size(), 1);
  for (int s : excluded) valid[static_cast<size_t>(s)] = 0;

  // Stage-1 mean log-likelihoods over all usable spaces.
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(c.num_classes());
  int used = 0;
  for (Eigen::Index s = 0; s < scores.rows(); ++s) {
    if (!valid[static_cast<size_t>(s)]) continue;
    mean += scores.row(s).transpose();
    ++used;
  }
  if (used == 0) throw NumericalError("classify: no usable spaces");
  res.per_class_scores = mean / static_cast<double>(used);
  return res;
}

}  // namespace

ClassificationResult classify_os(const Srvf& x, const TrainedClassifier& c) {
  std::vector<int> excluded;
  const Eigen::MatrixXd scores = space_scores(x, c, &excluded);
  ClassificationResult res = finish_result(c, scores, excluded);
  std::vector<char> valid(c.spaces.size(), 1);
  for (int s : excluded) valid[static_cast<size_t>(s)] = 0;
  res.predicted = c.class_ids[static_cast<size_t>(os_decide(scores, valid))];
  return res;
}

ClassificationResult classify_rec(const Srvf& x, const TrainedClassifier& c) {
  if (c.spec.pc_scope != PcScope::Pairwise)
    throw UsageError("classify_rec: requires an SP or PP classifier");
  std::vector<int> excluded;
  const Eigen::MatrixXd scores = space_scores(x, c, &excluded);
  ClassificationResult res = finish_result(c, scores, excluded);
  std::vector<char> valid(c.spaces.size(), 1);
  for (int s : excluded) valid[static_cast<size_t>(s)] = 0;

  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(c.spaces.size());
  for (const auto& s : c.spaces) pairs.emplace_back(s.class_i, s.class_j);

  const RecOutcome rec = rec_decide(scores, pairs, valid);
  res.predicted = c.class_ids[static_cast<size_t>(rec.predicted_index)];
  for (int d : rec.dropped_indices)
    res.recursion_trace.push_back(c.class_ids[static_cast<size_t>(d)]);
  return res;
}

ClassificationResult classify(const Srvf& x, const TrainedClassifier& c) {
  return c.spec.decision == Decision::Recursive ? classify_rec(x, c)
                                                : classify_os(x, c);
}

std::vector<ClassificationResult> classify_batch(const std::vector<Srvf>& xs,
                                                 const TrainedClassifier& c,
                                                 Exec exec) {
  std::vector<ClassificationResult> out(xs.size());
  par::for_index(static_cast<std::int64_t>(xs.size()), exec,
                 [&](std::int64_t i) { out[i] = classify(xs[i], c); });
  return out;
}

}  // namespace cls
}  // namespace srvf
