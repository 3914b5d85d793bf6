// nestband command-line driver. Talks to the library only through its C API.

#include "nestband/nestband.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kUsage = 2, kIo = 3, kNumerical = 4 };

struct Failure {
  int code;
  std::string message;
};

int exit_code(nb_status s) {
  switch (s) {
    case NB_OK: return kOk;
    case NB_ERR_IO: return kIo;
    case NB_ERR_SINGULAR:
    case NB_ERR_INTERNAL: return kNumerical;
    default: return kUsage;
  }
}

void check(nb_status s) {
  if (s != NB_OK) throw Failure{exit_code(s), nb_last_error()};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Mat = std::unique_ptr<nb_matrix, Deleter<nb_matrix, nb_matrix_free>>;
using Est = std::unique_ptr<nb_estimator, Deleter<nb_estimator, nb_estimator_free>>;
using Fit = std::unique_ptr<nb_fit, Deleter<nb_fit, nb_fit_free>>;
using Model = std::unique_ptr<nb_model, Deleter<nb_model, nb_model_free>>;
using Labels = std::unique_ptr<nb_labels, Deleter<nb_labels, nb_labels_free>>;
using Classifier = std::unique_ptr<nb_classifier, Deleter<nb_classifier, nb_classifier_free>>;
using Config = std::unique_ptr<nb_config, Deleter<nb_config, nb_config_free>>;
using Report = std::unique_ptr<nb_report, Deleter<nb_report, nb_report_free>>;

Mat read_matrix(const std::string& path) {
  nb_matrix* m = nullptr;
  check(nb_matrix_read_csv(path.c_str(), &m));
  return Mat(m);
}

void write_matrix(const nb_matrix* m, const fs::path& path) {
  check(nb_matrix_write_csv(m, path.string().c_str()));
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Failure{kIo, "cannot create output directory '" + dir + "'"};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Failure{kIo, "cannot write '" + path.string() + "'"};
}

nb_fit_options fit_options(const std::string& solver) {
  nb_fit_options o = nb_fit_options_default();
  if (solver == "lqa") {
    o.solver = NB_SOLVER_LQA;
  } else if (solver == "shooting") {
    o.solver = NB_SOLVER_SHOOTING;
  } else if (!solver.empty()) {
    throw Failure{kUsage, "unknown solver '" + solver + "' (expected lqa or shooting)"};
  }
  return o;
}

std::string numbered(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---- benchmark ----

struct BenchmarkArgs {
  std::string config, model, dist, solver, out, layout;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps, blocks, threads;
  std::optional<long> p, n_train, n_valid;
  std::vector<std::string> estimators, grids;
  bool fixed_truth = false, save_fits = false, quiet = false;
};

int run_benchmark_cmd(const BenchmarkArgs& a) {
  nb_config* raw = nullptr;
  check(nb_config_create(&raw));
  Config cfg(raw);
  if (!a.config.empty()) check(nb_config_read(cfg.get(), a.config.c_str()));
  auto set = [&](const std::string& key, const std::string& value) {
    check(nb_config_set(cfg.get(), key.c_str(), value.c_str()));
  };
  if (a.seed) set("seed", std::to_string(*a.seed));
  if (a.reps) set("replications", std::to_string(*a.reps));
  if (!a.model.empty()) set("model", a.model);
  if (a.p) set("p", std::to_string(*a.p));
  if (a.blocks) set("blocks", std::to_string(*a.blocks));
  if (!a.layout.empty()) set("sigma3_layout", a.layout);
  if (!a.dist.empty()) set("distribution", a.dist);
  if (a.n_train) set("n_train", std::to_string(*a.n_train));
  if (a.n_valid) set("n_valid", std::to_string(*a.n_valid));
  if (!a.solver.empty()) set("solver", a.solver);
  if (a.fixed_truth) set("fixed_truth", "true");
  if (a.save_fits) set("save_fits", "true");
  if (!a.estimators.empty()) {
    std::string list;
    for (const auto& e : a.estimators) list += (list.empty() ? "" : ",") + e;
    set("estimators", list);
  }
  for (const auto& g : a.grids) {
    const auto colon = g.find(':');
    if (colon != std::string::npos) {
      set("grid." + g.substr(0, colon), g.substr(colon + 1));
    } else if (a.estimators.size() == 1) {
      set("grid." + a.estimators.front(), g);
    } else {
      throw Failure{kUsage, "--grid '" + g + "' needs a 'family:' prefix unless exactly one --estimator is given"};
    }
  }
  if (!a.out.empty()) set("output_dir", a.out);
  const std::string out_dir = nb_config_output_dir(cfg.get());
  if (out_dir.empty()) throw Failure{kUsage, "no output directory (use --out or output_dir in the config)"};

  nb_report* rep = nullptr;
  check(nb_benchmark_run(cfg.get(), a.threads.value_or(0), &rep));
  Report report(rep);
  check(nb_report_write(report.get(), out_dir.c_str()));
  if (!a.quiet) std::cout << nb_report_summary_csv(report.get());
  const size_t warnings = nb_report_warning_count(report.get());
  if (warnings > 0) {
    std::cerr << warnings << " warning(s), see " << (fs::path(out_dir) / "warnings.txt").string() << "\n";
    for (size_t i = 0; i < std::min<size_t>(warnings, 5); ++i) std::cerr << "  " << nb_report_warning(report.get(), i) << "\n";
  }
  return kOk;
}

// ---- estimate ----

struct EstimateArgs {
  std::string in, valid, grid, solver, out;
  std::vector<std::string> estimators;
  int folds = 5;
  std::uint64_t seed = 1;
};

int run_estimate_cmd(const EstimateArgs& a) {
  if (a.estimators.size() != 1) throw Failure{kUsage, "estimate needs exactly one --estimator"};
  const std::string& family = a.estimators.front();
  const Mat data = read_matrix(a.in);
  const nb_fit_options opts = fit_options(a.solver);
  nb_estimator* e = nullptr;
  check(nb_estimator_create(family.c_str(), a.grid.c_str(), nb_matrix_cols(data.get()), nb_matrix_rows(data.get()), &e));
  const Est est(e);
  nb_fit* f = nullptr;
  if (!a.valid.empty()) {
    const Mat valid = read_matrix(a.valid);
    check(nb_fit_validation(data.get(), valid.get(), est.get(), &opts, &f));
  } else {
    check(nb_fit_kfold(data.get(), est.get(), &opts, a.folds, a.seed, &f));
  }
  const Fit fit(f);

  make_dir(a.out);
  const fs::path dir(a.out);
  nb_matrix* m = nullptr;
  check(nb_fit_covariance(fit.get(), &m));
  write_matrix(Mat(m).get(), dir / "covariance.csv");
  if (nb_fit_is_singular(fit.get())) {
    std::cerr << "warning: the estimate is singular; precision.csv not written\n";
  } else {
    check(nb_fit_precision(fit.get(), &m));
    write_matrix(Mat(m).get(), dir / "precision.csv");
  }
  if (nb_fit_has_factors(fit.get())) {
    check(nb_fit_factor(fit.get(), &m));
    write_matrix(Mat(m).get(), dir / "factor.csv");
    check(nb_fit_variances(fit.get(), &m));
    write_matrix(Mat(m).get(), dir / "variances.csv");
    check(nb_fit_bandwidths(fit.get(), &m));
    write_matrix(Mat(m).get(), dir / "bands.csv");
  }
  const std::string params = nb_fit_parameters(fit.get());
  std::cout << "estimator=" << family << (params.empty() ? "" : " " + params) << "\n";
  return kOk;
}

// ---- classify ----

struct ClassifyArgs {
  std::string train, test, kind = "lda", grid, solver, out;
  std::vector<std::string> estimators;
  int folds = 5, label_col = 0;
  std::uint64_t seed = 1;
};

int run_classify_cmd(const ClassifyArgs& a) {
  if (a.estimators.size() > 1) throw Failure{kUsage, "classify takes at most one --estimator"};
  const int label_col = a.label_col > 0 ? a.label_col - 1 : -1;
  nb_matrix* xr = nullptr;
  nb_labels* lr = nullptr;
  check(nb_labeled_read_csv(a.train.c_str(), label_col, &xr, &lr));
  const Mat train_x(xr);
  const Labels train_y(lr);
  check(nb_labeled_read_csv(a.test.c_str(), label_col, &xr, &lr));
  const Mat test_x(xr);
  const Labels test_y(lr);
  if (nb_matrix_cols(test_x.get()) != nb_matrix_cols(train_x.get())) {
    throw Failure{kUsage, "test data has " + std::to_string(nb_matrix_cols(test_x.get())) +
                              " variables, training data has " + std::to_string(nb_matrix_cols(train_x.get()))};
  }

  Est est;
  if (a.kind != "naive-bayes") {
    if (a.estimators.empty()) throw Failure{kUsage, a.kind + " needs --estimator"};
    nb_estimator* e = nullptr;
    check(nb_estimator_create(a.estimators.front().c_str(), a.grid.c_str(), nb_matrix_cols(train_x.get()),
                              nb_matrix_rows(train_x.get()), &e));
    est.reset(e);
  }
  const nb_fit_options opts = fit_options(a.solver);
  nb_classifier* c = nullptr;
  check(nb_classifier_fit(a.kind.c_str(), train_x.get(), train_y.get(), est.get(), &opts, a.folds, a.seed, &c));
  const Classifier clf(c);

  const size_t n = nb_matrix_rows(test_x.get()), p = nb_matrix_cols(test_x.get());
  std::vector<double> values(n * p);
  check(nb_matrix_copy(test_x.get(), values.data(), values.size()));
  std::string predictions;
  for (size_t i = 0; i < n; ++i) {
    size_t k = 0;
    check(nb_classifier_predict(clf.get(), values.data() + i * p, p, &k));
    predictions += std::string(nb_classifier_class(clf.get(), k)) + "\n";
  }
  size_t errors = 0;
  double rate = 0.0;
  check(nb_classifier_test_error(clf.get(), test_x.get(), test_y.get(), &errors, &rate));
  if (!a.out.empty()) {
    make_dir(a.out);
    write_text(fs::path(a.out) / "predictions.csv", predictions);
  }
  const std::string params = nb_classifier_parameters(clf.get());
  std::cout << "kind=" << a.kind << (params.empty() ? "" : " " + params) << " errors=" << errors
            << " total=" << n << " rate=" << numbered(rate) << "\n";
  return kOk;
}

// ---- heatmap ----

struct HeatmapArgs {
  std::string in, level = "precision", out;
  double zero_tol = 0.0;
};

int run_heatmap_cmd(const HeatmapArgs& a) {
  const std::string suffix = "_" + a.level + ".csv";
  std::vector<fs::path> files;
  std::error_code ec;
  if (!fs::is_directory(a.in, ec)) throw Failure{kUsage, "'" + a.in + "' is not a directory"};
  for (const auto& entry : fs::directory_iterator(a.in, ec)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("rep_", 0) == 0 && name.size() > suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      files.push_back(entry.path());
    }
  }
  if (ec) throw Failure{kIo, "cannot list '" + a.in + "'"};
  if (files.empty()) throw Failure{kUsage, "no rep_*" + suffix + " files in '" + a.in + "'"};
  std::sort(files.begin(), files.end());
  std::vector<Mat> fits;
  std::vector<const nb_matrix*> ptrs;
  for (const auto& f : files) {
    fits.push_back(read_matrix(f.string()));
    ptrs.push_back(fits.back().get());
  }
  nb_matrix* m = nullptr;
  check(nb_zero_frequency(ptrs.data(), ptrs.size(), a.level == "factor" ? NB_LEVEL_FACTOR : NB_LEVEL_PRECISION,
                          a.zero_tol, &m));
  const Mat freq(m);
  write_matrix(freq.get(), a.out);
  std::cout << "fits=" << files.size() << " level=" << a.level << "\n";
  return kOk;
}

// ---- simulate ----

struct SimulateArgs {
  std::string model = "sigma1", dist = "gaussian", layout = "start", out;
  long p = 30, n = 100;
  int blocks = 0;
  std::uint64_t seed = 1, stream = 0;
};

int run_simulate_cmd(const SimulateArgs& a) {
  if (a.p < 1 || a.n < 1) throw Failure{kUsage, "--p and --n must be positive"};
  nb_model* raw = nullptr;
  check(nb_model_create(a.model.c_str(), static_cast<size_t>(a.p), a.blocks, a.layout.c_str(), a.seed, a.stream, &raw));
  const Model model(raw);
  if (*nb_model_warning(model.get())) std::cerr << "warning: " << nb_model_warning(model.get()) << "\n";
  nb_matrix* m = nullptr;
  check(nb_model_sample(model.get(), a.dist.c_str(), static_cast<size_t>(a.n), a.seed, a.stream, &m));
  const Mat data(m);
  make_dir(a.out);
  const fs::path dir(a.out);
  write_matrix(data.get(), dir / "data.csv");
  check(nb_model_sigma(model.get(), &m));
  write_matrix(Mat(m).get(), dir / "sigma.csv");
  check(nb_model_omega(model.get(), &m));
  write_matrix(Mat(m).get(), dir / "omega.csv");
  check(nb_model_factor(model.get(), &m));
  write_matrix(Mat(m).get(), dir / "factor.csv");
  return kOk;
}

std::string config_key_help() {
  std::string s = "Config file keys (key = value, '#' starts a comment):\n";
  for (size_t i = 0; i < nb_config_key_count(); ++i) {
    std::string name = nb_config_key_name(i);
    name.resize(std::max<size_t>(name.size(), 16), ' ');
    s += "  " + name + " " + nb_config_key_help(i) + "\n";
  }
  s += "Environment: NESTBAND_THREADS caps the number of worker threads.\n";
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nestband: sparse covariance estimation by adaptive banding of the Cholesky factor"};
  app.require_subcommand(1);
  app.set_version_flag("--version", nb_version());

  const std::vector<std::string> families{"sample", "ledoit-wolf", "banding", "lasso", "j0", "j1", "j2"};
  const std::vector<std::string> models{"sigma1", "sigma2", "sigma3"};
  const std::vector<std::string> dists{"gaussian", "t3"};
  const std::vector<std::string> layouts{"start", "width"};
  const std::vector<std::string> solvers{"lqa", "shooting"};

  BenchmarkArgs ba;
  auto* bench = app.add_subcommand("benchmark", "Monte Carlo comparison of estimators on a simulated model");
  bench->add_option("--config", ba.config, "key = value config file")->check(CLI::ExistingFile);
  bench->add_option("--seed", ba.seed, "base RNG seed");
  bench->add_option("--reps", ba.reps, "replications")->check(CLI::PositiveNumber);
  bench->add_option("--model", ba.model, "covariance model")->check(CLI::IsMember(models));
  bench->add_option("--p", ba.p, "dimension")->check(CLI::PositiveNumber);
  bench->add_option("--blocks", ba.blocks, "sigma3 block count")->check(CLI::PositiveNumber);
  bench->add_option("--sigma3-layout", ba.layout, "sigma3 row layout")->check(CLI::IsMember(layouts));
  bench->add_option("--dist", ba.dist, "sampling distribution")->check(CLI::IsMember(dists));
  bench->add_option("--n-train", ba.n_train, "training observations")->check(CLI::PositiveNumber);
  bench->add_option("--n-valid", ba.n_valid, "validation observations")->check(CLI::PositiveNumber);
  bench->add_option("--estimator", ba.estimators, "estimator family (repeatable)")->check(CLI::IsMember(families));
  bench->add_option("--grid", ba.grids, "tuning grid, 'family:spec' (repeatable)");
  bench->add_option("--solver", ba.solver, "penalized solver")->check(CLI::IsMember(solvers));
  bench->add_option("--out", ba.out, "output directory");
  bench->add_option("--threads", ba.threads, "worker threads")->check(CLI::PositiveNumber);
  bench->add_flag("--fixed-truth", ba.fixed_truth, "draw sigma3 once for all replications");
  bench->add_flag("--save-fits", ba.save_fits, "write every fitted factor and precision");
  bench->add_flag("--quiet", ba.quiet, "do not print the summary");
  bench->footer(config_key_help());

  EstimateArgs ea;
  auto* estimate = app.add_subcommand("estimate", "Fit one estimator to a CSV data matrix");
  estimate->add_option("--in", ea.in, "data CSV (rows are observations)")->required();
  estimate->add_option("--estimator", ea.estimators, "estimator family")->required()->check(CLI::IsMember(families));
  estimate->add_option("--grid", ea.grid, "tuning grid spec");
  estimate->add_option("--valid", ea.valid, "validation CSV; selects on it instead of cross-validation");
  estimate->add_option("--folds", ea.folds, "cross-validation folds")->check(CLI::Range(2, 1000));
  estimate->add_option("--seed", ea.seed, "fold assignment seed");
  estimate->add_option("--solver", ea.solver, "penalized solver")->check(CLI::IsMember(solvers));
  estimate->add_option("--out", ea.out, "output directory")->required();

  ClassifyArgs ca;
  auto* classify = app.add_subcommand("classify", "Discriminant analysis with a plug-in covariance estimator");
  classify->add_option("--train", ca.train, "labeled training CSV")->required();
  classify->add_option("--test", ca.test, "labeled test CSV")->required();
  classify->add_option("--kind", ca.kind, "classifier")->check(CLI::IsMember({"lda", "qda", "naive-bayes"}));
  classify->add_option("--estimator", ca.estimators, "covariance estimator family")->check(CLI::IsMember(families));
  classify->add_option("--grid", ca.grid, "tuning grid spec");
  classify->add_option("--label-col", ca.label_col, "1-based label column (default: last)")->check(CLI::NonNegativeNumber);
  classify->add_option("--folds", ca.folds, "cross-validation folds")->check(CLI::Range(2, 1000));
  classify->add_option("--seed", ca.seed, "fold assignment seed");
  classify->add_option("--solver", ca.solver, "penalized solver")->check(CLI::IsMember(solvers));
  classify->add_option("--out", ca.out, "directory for predictions.csv");

  HeatmapArgs ha;
  auto* heatmap = app.add_subcommand("heatmap", "Zero-frequency matrix over stored fits");
  heatmap->add_option("--in", ha.in, "directory holding rep_*_{factor,precision}.csv")->required();
  heatmap->add_option("--level", ha.level, "factor or precision")->check(CLI::IsMember({"factor", "precision"}));
  heatmap->add_option("--zero-tol", ha.zero_tol, "absolute zero tolerance")->check(CLI::NonNegativeNumber);
  heatmap->add_option("--out", ha.out, "output CSV")->required();

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Export a simulated dataset and its true matrices");
  simulate->add_option("--model", sa.model, "covariance model")->check(CLI::IsMember(models));
  simulate->add_option("--p", sa.p, "dimension")->check(CLI::PositiveNumber);
  simulate->add_option("--n", sa.n, "observations")->check(CLI::PositiveNumber);
  simulate->add_option("--blocks", sa.blocks, "sigma3 block count")->check(CLI::PositiveNumber);
  simulate->add_option("--sigma3-layout", sa.layout, "sigma3 row layout")->check(CLI::IsMember(layouts));
  simulate->add_option("--dist", sa.dist, "sampling distribution")->check(CLI::IsMember(dists));
  simulate->add_option("--seed", sa.seed, "base RNG seed");
  simulate->add_option("--stream", sa.stream, "RNG stream");
  simulate->add_option("--out", sa.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*bench) return run_benchmark_cmd(ba);
    if (*estimate) return run_estimate_cmd(ea);
    if (*classify) return run_classify_cmd(ca);
    if (*heatmap) return run_heatmap_cmd(ha);
    if (*simulate) return run_simulate_cmd(sa);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.code;
  }
  return kUsage;
}
