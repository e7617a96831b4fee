// shapecls: elastic shape analysis and aggregated pairwise classification of
// planar outlines.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "srvf/classify.hpp"
#include "srvf/errors.hpp"
#include "srvf/experiment.hpp"
#include "srvf/io.hpp"
#include "srvf/manifold.hpp"
#include "srvf/model_io.hpp"
#include "srvf/parallel.hpp"
#include "srvf/registration.hpp"
#include "srvf/simulation.hpp"
#include "srvf/synthetic.hpp"

using namespace srvf;

namespace {

struct CommonIn {
  std::string path;
  std::string format = "csv";
  bool open_curves = false;
  int m = 100;
};

void add_input_options(CLI::App* cmd, CommonIn& in, const char* what) {
  cmd->add_option("--input,--dataset", in.path, what)->required();
  cmd->add_option("--format", in.format, "outline format (csv|txt)");
  cmd->add_flag("--open", in.open_curves,
                "treat outlines as open curves (default closed)");
  cmd->add_option("--m", in.m, "resampling points")->check(CLI::PositiveNumber);
}

std::vector<PlanarCurve> load_curves(const CommonIn& in) {
  return load_outlines(in.path, parse_outline_format(in.format),
                       !in.open_curves);
}

std::vector<Srvf> preprocess(const std::vector<PlanarCurve>& curves, int m) {
  std::vector<Srvf> shapes(curves.size());
  par::for_index(static_cast<std::int64_t>(curves.size()), Exec::Parallel,
                 [&](std::int64_t i) {
                   shapes[i] =
                       to_srvf(resample_arclength(normalize(curves[i]), m));
                 });
  return shapes;
}

std::vector<int> parse_int_list(const std::string& csv, const char* what) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw UsageError(std::string("bad ") + what + " value '" + tok + "'");
    }
  }
  if (out.empty()) throw UsageError(std::string("empty ") + what + " list");
  return out;
}

std::vector<double> parse_double_list(const std::string& csv, const char* what) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw UsageError(std::string("bad ") + what + " value '" + tok + "'");
    }
  }
  if (out.empty()) throw UsageError(std::string("empty ") + what + " list");
  return out;
}

cls::Model parse_model(const std::string& name) {
  std::string up;
  for (char c : name) up.push_back(static_cast<char>(std::toupper(c)));
  if (up == "LDA") return cls::Model::Lda;
  if (up == "QDA") return cls::Model::Qda;
  throw UsageError("unknown model '" + name + "' (LDA|QDA)");
}

std::string trace_string(const std::vector<int>& trace) {
  std::string s;
  for (size_t i = 0; i < trace.size(); ++i) {
    if (i) s += '|';
    s += std::to_string(trace[i]);
  }
  return s;
}

void write_predictions(const std::string& path,
                       const std::vector<PlanarCurve>& curves,
                       const std::vector<cls::ClassificationResult>& results,
                       const std::vector<int>& class_ids) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "shape_id,true_label,predicted,stage_trace";
  for (size_t k = 1; k <= class_ids.size(); ++k) out << ",score_" << k;
  out << '\n';
  out.precision(10);
  for (size_t i = 0; i < curves.size(); ++i) {
    out << (curves[i].id.empty() ? "shape" + std::to_string(i) : curves[i].id)
        << ',';
    if (curves[i].label) out << *curves[i].label;
    out << ',' << results[i].predicted << ','
        << trace_string(results[i].recursion_trace);
    for (Eigen::Index k = 0; k < results[i].per_class_scores.size(); ++k)
      out << ',' << results[i].per_class_scores(k);
    out << '\n';
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

int run(int argc, char** argv) {
  CLI::App app{
      "Elastic shape analysis of planar outlines with aggregated pairwise "
      "LDA/QDA classification"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI config file with long-option values");

  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = all cores)");

  // ---- ingest ----
  CommonIn ingest_in;
  std::string ingest_out;
  bool ingest_raw = false;
  auto* ingest = app.add_subcommand(
      "ingest", "load outlines, validate, normalize and resample");
  add_input_options(ingest, ingest_in, "outline file or directory");
  ingest->add_option("--out", ingest_out, "canonical csv output")->required();
  ingest->add_flag("--raw", ingest_raw, "skip normalization and resampling");

  // ---- register ----
  CommonIn reg_in;
  int reg_i = 0, reg_j = 1, reg_steps = 0, reg_stride = 1;
  std::string geodesic_out;
  auto* register_cmd =
      app.add_subcommand("register", "align two shapes and print the distance");
  add_input_options(register_cmd, reg_in, "outline file with >= 2 shapes");
  register_cmd->add_option("--i", reg_i, "index of the reference shape");
  register_cmd->add_option("--j", reg_j, "index of the shape to align");
  register_cmd->add_option("--seed-stride", reg_stride,
                           "closed-curve start-point search stride");
  register_cmd->add_option("--steps", reg_steps,
                           "geodesic steps (with --geodesic-out)");
  register_cmd->add_option("--geodesic-out", geodesic_out,
                           "write the geodesic path as outline csv");

  // ---- mean ----
  CommonIn mean_in;
  std::string mean_out, mean_curve_out;
  int mean_stride = 1, mean_max_iter = 50;
  double mean_tol = 1e-5;
  std::uint64_t mean_seed = 1;
  auto* mean_cmd =
      app.add_subcommand("mean", "Karcher mean of all shapes in the file");
  add_input_options(mean_cmd, mean_in, "outline file");
  mean_cmd->add_option("--out", mean_out, "mean model json")->required();
  mean_cmd->add_option("--curve-out", mean_curve_out,
                       "also write the mean as an outline csv");
  mean_cmd->add_option("--seed-stride", mean_stride, "seed search stride");
  mean_cmd->add_option("--tol", mean_tol, "gradient norm tolerance");
  mean_cmd->add_option("--max-iter", mean_max_iter, "iteration cap");
  mean_cmd->add_option("--seed", mean_seed, "rng seed (anchor choice)");

  // ---- train ----
  CommonIn train_in;
  std::string train_method = "PP-OS", train_model = "QDA", train_out;
  int train_r = 8, train_stride = 1;
  std::uint64_t train_seed = 1;
  auto* train_cmd = app.add_subcommand("train", "fit a classifier");
  add_input_options(train_cmd, train_in, "labeled outline dataset");
  train_cmd->add_option("--method", train_method,
                        "SS|SP-OS|SP-REC|PP-OS|PP-REC");
  train_cmd->add_option("--model", train_model, "LDA|QDA");
  train_cmd->add_option("--r", train_r, "PC dimensions")->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed-stride", train_stride, "seed search stride");
  train_cmd->add_option("--seed", train_seed, "rng seed");
  train_cmd->add_option("--out", train_out, "model json")->required();

  // ---- classify ----
  CommonIn classify_in;
  std::string classify_model, classify_out;
  auto* classify_cmd =
      app.add_subcommand("classify", "classify shapes with a trained model");
  add_input_options(classify_cmd, classify_in, "outline file to classify");
  classify_cmd->add_option("--model-file", classify_model, "model json")
      ->required();
  classify_cmd->add_option("--out", classify_out, "prediction csv")->required();

  // ---- experiment ----
  CommonIn exp_in;
  std::string exp_methods = "SS,SP-OS,SP-REC,PP-OS,PP-REC";
  std::string exp_models = "QDA";
  std::string exp_r = "8";
  std::string exp_out;
  int exp_splits = 25, exp_train = 40, exp_stride = 1;
  std::uint64_t exp_seed = 1;
  bool exp_avg_r = false, exp_quiet = false;
  auto* exp_cmd = app.add_subcommand(
      "experiment", "random-split sweep over methods, models and r");
  add_input_options(exp_cmd, exp_in, "labeled outline dataset");
  exp_cmd->add_option("--method", exp_methods, "comma list of methods");
  exp_cmd->add_option("--model", exp_models, "comma list of LDA|QDA");
  exp_cmd->add_option("--r", exp_r, "comma list of PC dimensions");
  exp_cmd->add_option("--splits", exp_splits, "random splits")
      ->check(CLI::PositiveNumber);
  exp_cmd->add_option("--train-per-class", exp_train, "training shapes per class");
  exp_cmd->add_option("--seed", exp_seed, "rng seed");
  exp_cmd->add_option("--seed-stride", exp_stride, "seed search stride");
  exp_cmd->add_flag("--average-over-r", exp_avg_r,
                    "emit one row per method x model, averaged over r");
  exp_cmd->add_flag("--quiet", exp_quiet, "suppress per-split progress");
  exp_cmd->add_option("--out", exp_out, "result table csv")->required();

  // ---- simulate ----
  std::string sim_mode = "qgrid", sim_mu = "0,2,6", sim_out_dir = ".";
  int sim_n = 20000, sim_replicates = 50;
  double sim_nu = 5.0;
  std::uint64_t sim_seed = 1;
  auto* sim_cmd = app.add_subcommand(
      "simulate", "one-dimensional transform simulation (q grid or methods)");
  sim_cmd->add_option("--mode", sim_mode, "qgrid|methods");
  sim_cmd->add_option("--mu", sim_mu, "three class locations, comma separated");
  sim_cmd->add_option("--nu", sim_nu, "t degrees of freedom");
  sim_cmd->add_option("--n", sim_n, "samples per class")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--replicates", sim_replicates, "methods-mode replicates");
  sim_cmd->add_option("--seed", sim_seed, "rng seed");
  sim_cmd->add_option("--out-dir", sim_out_dir, "output directory");

  // ---- synth ----
  std::string synth_out;
  int synth_classes = 3, synth_per_class = 60, synth_points = 120;
  double synth_noise = 0.25;
  bool synth_no_outgroup = false;
  std::uint64_t synth_seed = 7;
  auto* synth_cmd = app.add_subcommand(
      "synth", "generate the synthetic outgroup benchmark as outline csv");
  synth_cmd->add_option("--classes", synth_classes, "similar classes");
  synth_cmd->add_option("--per-class", synth_per_class, "shapes per class");
  synth_cmd->add_option("--points", synth_points, "points per outline");
  synth_cmd->add_option("--noise", synth_noise, "within-class noise scale");
  synth_cmd->add_flag("--no-outgroup", synth_no_outgroup, "omit the outgroup");
  synth_cmd->add_option("--seed", synth_seed, "rng seed");
  synth_cmd->add_option("--out", synth_out, "output csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  par::set_threads(threads);

  if (*ingest) {
    auto curves = load_curves(ingest_in);
    if (!ingest_raw) {
      for (auto& c : curves) c = resample_arclength(normalize(c), ingest_in.m);
    }
    write_outlines(ingest_out, curves);
    std::printf("ingested %zu curve(s) -> %s\n", curves.size(),
                ingest_out.c_str());
  } else if (*register_cmd) {
    const auto curves = load_curves(reg_in);
    if (reg_i < 0 || reg_j < 0 ||
        reg_i >= static_cast<int>(curves.size()) ||
        reg_j >= static_cast<int>(curves.size()))
      throw DataError("register: shape indices out of range (file has " +
                      std::to_string(curves.size()) + " shapes)");
    const auto shapes = preprocess(curves, reg_in.m);
    reg::RegisterOptions opts;
    opts.seed_stride = reg_stride;
    const auto a = reg::register_pair(shapes[static_cast<size_t>(reg_i)],
                                      shapes[static_cast<size_t>(reg_j)], opts);
    std::printf("distance %.6f  rotation %.4f rad  seed shift %d\n", a.distance,
                a.rotation.angle(), a.seed_shift);
    if (!geodesic_out.empty()) {
      if (reg_steps < 1) throw UsageError("--geodesic-out requires --steps >= 1");
      const Srvf aligned = reg::apply_alignment(
          shapes[static_cast<size_t>(reg_j)], a);
      const auto path = reg::geodesic_path(shapes[static_cast<size_t>(reg_i)],
                                           aligned, reg_steps);
      std::vector<PlanarCurve> path_curves;
      for (size_t k = 0; k < path.size(); ++k) {
        PlanarCurve c = from_srvf(path[k]);
        c.id = "step" + std::to_string(k);
        path_curves.push_back(std::move(c));
      }
      write_outlines(geodesic_out, path_curves);
      std::printf("geodesic with %d steps -> %s\n", reg_steps,
                  geodesic_out.c_str());
    }
  } else if (*mean_cmd) {
    const auto curves = load_curves(mean_in);
    const auto shapes = preprocess(curves, mean_in.m);
    manifold::MeanConfig cfg;
    cfg.tol = mean_tol;
    cfg.max_iter = mean_max_iter;
    cfg.seed = mean_seed;
    cfg.reg.seed_stride = mean_stride;
    const auto km = manifold::karcher_mean(shapes, cfg);
    model_io::save_karcher_mean(km, mean_out);
    std::printf("karcher mean of %zu shapes: %s after %d iteration(s), "
                "gradient norm %.2e -> %s\n",
                shapes.size(), km.converged ? "converged" : "NOT converged",
                km.iterations, km.final_gradient_norm, mean_out.c_str());
    if (!mean_curve_out.empty()) {
      PlanarCurve c = from_srvf(km.mean);
      c.id = "mean";
      write_outlines(mean_curve_out, {c});
    }
  } else if (*train_cmd) {
    const auto curves = load_curves(train_in);
    const auto shapes = preprocess(curves, train_in.m);
    std::vector<int> labels;
    for (const auto& c : curves) {
      if (!c.label) throw DataError("train: shape '" + c.id + "' is unlabeled");
      labels.push_back(*c.label);
    }
    cls::ClassifierSpec spec = cls::parse_method(train_method);
    spec.model = parse_model(train_model);
    spec.r = train_r;
    cls::TrainOptions topts;
    topts.mean.seed = train_seed;
    topts.mean.reg.seed_stride = train_stride;
    const auto classifier = cls::train(shapes, labels, spec, topts);
    model_io::save_classifier(classifier, train_out);
    std::printf("trained %s %s r=%d on %zu shapes (%d classes) -> %s\n",
                spec.method_name().c_str(), spec.model_name().c_str(), spec.r,
                shapes.size(), classifier.num_classes(), train_out.c_str());
  } else if (*classify_cmd) {
    const auto classifier = model_io::load_classifier(classify_model);
    const auto curves = load_curves(classify_in);
    if (classifier.projections.empty())
      throw DataError("model file has no projection points");
    const int m = static_cast<int>(classifier.projections[0].size());
    const auto shapes = preprocess(curves, m);
    const auto results = cls::classify_batch(shapes, classifier);
    write_predictions(classify_out, curves, results, classifier.class_ids);
    int correct = 0, labeled = 0;
    for (size_t i = 0; i < curves.size(); ++i) {
      if (!curves[i].label) continue;
      ++labeled;
      if (*curves[i].label == results[i].predicted) ++correct;
    }
    std::printf("classified %zu shape(s) -> %s\n", shapes.size(),
                classify_out.c_str());
    if (labeled > 0)
      std::printf("accuracy on %d labeled shape(s): %.4f%%\n", labeled,
                  100.0 * correct / labeled);
  } else if (*exp_cmd) {
    const auto curves = load_curves(exp_in);
    expt::ExperimentConfig cfg;
    cfg.m = exp_in.m;
    cfg.splits = exp_splits;
    cfg.train_per_class = exp_train;
    cfg.seed = exp_seed;
    cfg.seed_stride = exp_stride;
    cfg.average_over_r = exp_avg_r;
    cfg.log_progress = !exp_quiet;
    std::stringstream ms(exp_methods);
    std::string mt;
    while (std::getline(ms, mt, ',')) {
      const cls::ClassifierSpec base = cls::parse_method(mt);
      std::stringstream os(exp_models);
      std::string om;
      while (std::getline(os, om, ',')) {
        for (int r : parse_int_list(exp_r, "r")) {
          cls::ClassifierSpec spec = base;
          spec.model = parse_model(om);
          spec.r = r;
          cfg.specs.push_back(spec);
        }
      }
    }
    const auto table = expt::run_experiment(curves, cfg);
    expt::emit_table(table, exp_out);
    std::printf("experiment table (%zu rows over %d splits) -> %s\n",
                table.rows.size(), table.n_splits, exp_out.c_str());
  } else if (*sim_cmd) {
    sim::SimConfig cfg;
    const auto mus = parse_double_list(sim_mu, "mu");
    if (mus.size() != 3) throw UsageError("--mu needs exactly 3 values");
    for (int k = 0; k < 3; ++k)
      cfg.mus[static_cast<size_t>(k)] = mus[static_cast<size_t>(k)];
    cfg.nu = sim_nu;
    cfg.n = sim_n;
    cfg.seed = sim_seed;
    std::filesystem::create_directories(sim_out_dir);
    if (sim_mode == "qgrid") {
      const auto res = sim::run_q_sensitivity(cfg);
      const std::string path = sim_out_dir + "/q_sensitivity.csv";
      sim::write_q_sensitivity_csv(res, path);
      std::printf("aggregated pairwise-mean rate %.4f, overall-mean rate %.4f\n",
                  res.aggregated_pairwise_rate, res.overall_mean_rate);
      std::printf("q grid -> %s\n", path.c_str());
    } else if (sim_mode == "methods") {
      const auto res = sim::run_method_comparison(cfg, sim_replicates);
      const std::string path = sim_out_dir + "/method_comparison.csv";
      sim::write_method_comparison_csv(res, path);
      std::printf("%d replicate(s) -> %s\n", sim_replicates, path.c_str());
    } else {
      throw UsageError("unknown --mode '" + sim_mode + "' (qgrid|methods)");
    }
  } else if (*synth_cmd) {
    synthetic::BenchmarkOptions opt;
    opt.similar_classes = synth_classes;
    opt.per_class = synth_per_class;
    opt.points = synth_points;
    opt.noise = synth_noise;
    opt.outgroup = !synth_no_outgroup;
    opt.seed = synth_seed;
    const auto curves = synthetic::make_benchmark(opt);
    write_outlines(synth_out, curves);
    std::printf("wrote %zu synthetic shapes -> %s\n", curves.size(),
                synth_out.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
