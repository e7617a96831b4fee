#include "srvf/model_io.hpp"

#include <fstream>

#include <json.hpp>

#include "srvf/errors.hpp"

namespace srvf {
namespace model_io {

namespace {

using nlohmann::json;
constexpr int kFormatVersion = 1;

json srvf_to_json(const Srvf& q) {
  json j;
  j["closed"] = q.closed;
  j["x"] = std::vector<double>(q.values.row(0).begin(), q.values.row(0).end());
  j["y"] = std::vector<double>(q.values.row(1).begin(), q.values.row(1).end());
  return j;
}

Srvf srvf_from_json(const json& j) {
  Srvf q;
  q.closed = j.at("closed").get<bool>();
  const auto x = j.at("x").get<std::vector<double>>();
  const auto y = j.at("y").get<std::vector<double>>();
  if (x.size() != y.size()) throw DataError("model file: srvf length mismatch");
  q.values.resize(2, static_cast<Eigen::Index>(x.size()));
  for (size_t i = 0; i < x.size(); ++i) {
    q.values(0, static_cast<Eigen::Index>(i)) = x[i];
    q.values(1, static_cast<Eigen::Index>(i)) = y[i];
  }
  return q;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  if (j.empty()) return {};
  const auto nrows = static_cast<Eigen::Index>(j.size());
  const auto ncols = static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(nrows, ncols);
  for (Eigen::Index i = 0; i < nrows; ++i) {
    const auto row = j.at(static_cast<size_t>(i)).get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != ncols)
      throw DataError("model file: ragged matrix");
    for (Eigen::Index c = 0; c < ncols; ++c) m(i, c) = row[static_cast<size_t>(c)];
  }
  return m;
}

json basis_to_json(const manifold::PcBasis& b) {
  json j;
  j["base"] = srvf_to_json(b.base);
  j["directions"] = matrix_to_json(b.directions);
  j["variances"] = std::vector<double>(b.variances.begin(), b.variances.end());
  j["r"] = b.r;
  j["basis_id"] = b.basis_id;
  return j;
}

manifold::PcBasis basis_from_json(const json& j) {
  manifold::PcBasis b;
  b.base = srvf_from_json(j.at("base"));
  b.directions = matrix_from_json(j.at("directions"));
  const auto v = j.at("variances").get<std::vector<double>>();
  b.variances = Eigen::Map<const Eigen::VectorXd>(v.data(),
                                                  static_cast<Eigen::Index>(v.size()));
  b.r = j.at("r").get<int>();
  b.basis_id = j.at("basis_id").get<std::uint64_t>();
  return b;
}

json read_checked(const std::string& path, const std::string& type) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw DataError("'" + path + "': " + e.what());
  }
  if (j.value("format_version", -1) != kFormatVersion)
    throw DataError("'" + path + "': unsupported format_version");
  if (j.value("type", "") != type)
    throw DataError("'" + path + "': expected a " + type + " file");
  return j;
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << j.dump(1) << '\n';
  if (!out) throw DataError("write failed for '" + path + "'");
}

}  // namespace

void save_karcher_mean(const manifold::KarcherMean& mean,
                       const std::string& path) {
  json j;
  j["format_version"] = kFormatVersion;
  j["type"] = "karcher_mean";
  j["mean"] = srvf_to_json(mean.mean);
  json aligned = json::array();
  for (const auto& q : mean.aligned_samples) aligned.push_back(srvf_to_json(q));
  j["aligned_samples"] = aligned;
  j["iterations"] = mean.iterations;
  j["final_gradient_norm"] = mean.final_gradient_norm;
  j["converged"] = mean.converged;
  j["objective_history"] = mean.objective_history;
  write_json(j, path);
}

manifold::KarcherMean load_karcher_mean(const std::string& path) {
  const json j = read_checked(path, "karcher_mean");
  manifold::KarcherMean m;
  m.mean = srvf_from_json(j.at("mean"));
  for (const auto& q : j.at("aligned_samples")) m.aligned_samples.push_back(srvf_from_json(q));
  m.iterations = j.at("iterations").get<int>();
  m.final_gradient_norm = j.at("final_gradient_norm").get<double>();
  m.converged = j.at("converged").get<bool>();
  m.objective_history = j.at("objective_history").get<std::vector<double>>();
  return m;
}

void save_classifier(const cls::TrainedClassifier& c, const std::string& path) {
  json j;
  j["format_version"] = kFormatVersion;
  j["type"] = "classifier";
  j["spec"] = {{"projection", c.spec.projection == cls::Projection::Single ? "single" : "pairwise"},
               {"pc_scope", c.spec.pc_scope == cls::PcScope::Single ? "single" : "pairwise"},
               {"decision", c.spec.decision == cls::Decision::OneShot ? "one_shot" : "recursive"},
               {"model", c.spec.model == cls::Model::Lda ? "LDA" : "QDA"},
               {"r", c.spec.r}};
  j["class_ids"] = c.class_ids;
  j["register_options"] = {{"max_rounds", c.reg.max_rounds},
                           {"tol", c.reg.tol},
                           {"seed_stride", c.reg.seed_stride}};
  json projections = json::array();
  for (const auto& p : c.projections) projections.push_back(srvf_to_json(p));
  j["projections"] = projections;

  json spaces = json::array();
  for (const auto& s : c.spaces) {
    json js;
    js["class_i"] = s.class_i;
    js["class_j"] = s.class_j;
    js["projection_index"] = s.projection_index;
    js["basis"] = basis_to_json(s.basis);
    json models = json::array();
    for (const auto& g : s.models) {
      json jm;
      jm["class_id"] = g.class_id;
      jm["mean"] = std::vector<double>(g.mean.begin(), g.mean.end());
      jm["covariance"] = matrix_to_json(g.covariance);
      models.push_back(jm);
    }
    js["models"] = models;
    js["pooled_covariance"] = matrix_to_json(s.pooled_covariance);
    spaces.push_back(js);
  }
  j["spaces"] = spaces;
  write_json(j, path);
}

cls::TrainedClassifier load_classifier(const std::string& path) {
  const json j = read_checked(path, "classifier");
  cls::TrainedClassifier c;
  const auto& spec = j.at("spec");
  c.spec.projection = spec.at("projection") == "single" ? cls::Projection::Single
                                                        : cls::Projection::Pairwise;
  c.spec.pc_scope = spec.at("pc_scope") == "single" ? cls::PcScope::Single
                                                    : cls::PcScope::Pairwise;
  c.spec.decision = spec.at("decision") == "one_shot" ? cls::Decision::OneShot
                                                      : cls::Decision::Recursive;
  c.spec.model = spec.at("model") == "LDA" ? cls::Model::Lda : cls::Model::Qda;
  c.spec.r = spec.at("r").get<int>();
  c.class_ids = j.at("class_ids").get<std::vector<int>>();
  c.reg.max_rounds = j.at("register_options").at("max_rounds").get<int>();
  c.reg.tol = j.at("register_options").at("tol").get<double>();
  c.reg.seed_stride = j.at("register_options").at("seed_stride").get<int>();
  for (const auto& p : j.at("projections")) c.projections.push_back(srvf_from_json(p));
  for (const auto& js : j.at("spaces")) {
    cls::PairwiseSpace s;
    s.class_i = js.at("class_i").get<int>();
    s.class_j = js.at("class_j").get<int>();
    s.projection_index = js.at("projection_index").get<int>();
    s.basis = basis_from_json(js.at("basis"));
    for (const auto& jm : js.at("models")) {
      cls::GaussianClassModel g;
      g.class_id = jm.at("class_id").get<int>();
      const auto mv = jm.at("mean").get<std::vector<double>>();
      g.mean = Eigen::Map<const Eigen::VectorXd>(mv.data(),
                                                 static_cast<Eigen::Index>(mv.size()));
      g.covariance = matrix_from_json(jm.at("covariance"));
      s.models.push_back(std::move(g));
    }
    s.pooled_covariance = matrix_from_json(js.at("pooled_covariance"));
    c.spaces.push_back(std::move(s));
  }
  return c;
}

}  // namespace model_io
}  // namespace srvf
