#include "nestband/benchmark.hpp"

#include "nestband/csv.hpp"
#include "nestband/error.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <sstream>
#include <thread>

namespace nestband {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
  T v{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) {
    throw ParseError(key + ": '" + value + "' is not an integer");
  }
  return v;
}

double parse_real(const std::string& key, const std::string& value) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(v)) {
    throw ParseError(key + ": '" + value + "' is not a number");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ParseError(key + ": '" + value + "' is not a boolean (true/false)");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string solver_name(Solver s) { return s == Solver::Lqa ? "lqa" : "shooting"; }

TuningGrid grid_for(const ExperimentConfig& c, const std::string& family) {
  const auto it = c.grids.find(family);
  return parse_grid(family, it == c.grids.end() ? "" : it->second, c.p, c.n_train);
}

CovModel truth_for(const ExperimentConfig& c, int replication) {
  switch (c.model) {
    case ModelKind::Sigma1: return make_sigma1(c.p);
    case ModelKind::Sigma2: return make_sigma2(c.p);
    case ModelKind::Sigma3: {
      const std::uint64_t stream = c.fixed_truth ? 0 : 3 * static_cast<std::uint64_t>(replication);
      return make_sigma3(c.p, c.effective_blocks(), {c.seed, stream}, c.layout);
    }
  }
  throw DomainError("unknown model");
}

// Farthest nonzero lag over all rows.
Index farthest_lag(const CholeskyFactors& f) {
  Index band = 0;
  for (Index j = 1; j < f.p(); ++j) {
    for (Index l = 0; l < j; ++l) {
      if (f.phi()(j, l) != 0.0) {
        band = std::max(band, j - l);
        break;
      }
    }
  }
  return band;
}

struct ZeroCounts {
  Matrix factor;
  Matrix precision;
  int fits = 0;
};

struct RepOutput {
  std::vector<ReplicationResult> rows;
  std::vector<std::string> warnings;
};

std::string rep_tag(const std::string& estimator, int r) {
  return estimator + " replication " + std::to_string(r);
}

RepOutput run_replication(const ExperimentConfig& c, const CovModel* shared_truth, int r,
                          std::vector<ZeroCounts>& counts) {
  RepOutput out;
  CovModel local;
  if (!shared_truth) {
    local = truth_for(c, r);
    if (!local.warning.empty()) out.warnings.push_back("replication " + std::to_string(r) + ": " + local.warning);
  }
  const CovModel& truth = shared_truth ? *shared_truth : local;
  const auto rs = static_cast<std::uint64_t>(r);
  const Dataset train = center(sample(truth, c.distribution, c.n_train, {c.seed, 3 * rs + 1}));
  const Dataset valid =
      shift_by(sample(truth, c.distribution, c.n_valid, {c.seed, 3 * rs + 2}), train.column_means);

  for (std::size_t e = 0; e < c.estimators.size(); ++e) {
    const std::string& family = c.estimators[e];
    ReplicationResult row;
    row.estimator = family;
    row.replication = r;
    Estimate est;
    try {
      const TuningGrid grid = grid_for(c, family);
      if (grid.candidates.size() == 1) {
        est = fit_estimator(train, grid.candidates.front(), c.fit);
        row.parameters = grid.candidates.front().parameters();
      } else {
        const Selection s = select_on_validation(train, valid, grid, c.fit, &est);
        row.parameters = s.best.parameters();
      }
    } catch (const DomainError& ex) {
      row.failed = true;
      out.warnings.push_back(rep_tag(family, r) + ": no estimate (" + ex.what() + ")");
    } catch (const SingularError& ex) {
      row.failed = true;
      out.warnings.push_back(rep_tag(family, r) + ": no estimate (" + ex.what() + ")");
    }
    if (row.failed) {
      row.losses.norms = {NAN, NAN, NAN, NAN};
      out.rows.push_back(std::move(row));
      continue;
    }

    row.losses = evaluate_estimate(truth.true_factors, truth.sigma, est);
    if (est.singular) out.warnings.push_back(rep_tag(family, r) + ": estimate is singular, KL and entropy are NA");
    if (est.flags.unconverged_rows > 0) {
      out.warnings.push_back(rep_tag(family, r) + ": " + std::to_string(est.flags.unconverged_rows) +
                             " rows stopped at max_iters");
    }
    if (est.flags.jittered_solves > 0) {
      out.warnings.push_back(rep_tag(family, r) + ": " + std::to_string(est.flags.jittered_solves) +
                             " ridge solves needed diagonal jitter");
    }
    if (est.flags.degenerate_rows > 0) {
      out.warnings.push_back(rep_tag(family, r) + ": " + std::to_string(est.flags.degenerate_rows) +
                             " innovation variances clamped to the floor");
    }

    std::optional<CholeskyFactors> factors = est.factors;
    if (!factors && !est.singular) {
      try {
        factors = factors_from_covariance(est.covariance);
      } catch (const DomainError&) {
        factors.reset();
      }
    }
    if (est.factors) row.bandwidth = farthest_lag(*est.factors);
    if (factors && !est.singular) {
      const Matrix t = factors->t();
      ZeroCounts& zc = counts[e];
      if (zc.fits == 0) {
        zc.factor = Matrix::Zero(c.p, c.p);
        zc.precision = Matrix::Zero(c.p, c.p);
      }
      zc.factor += zero_frequency(std::span<const Matrix>(&t, 1), ZeroLevel::Factor);
      zc.precision += zero_frequency(std::span<const Matrix>(&est.precision, 1), ZeroLevel::Precision);
      ++zc.fits;
      if (c.save_fits) {
        row.factor = t;
        row.precision = est.precision;
      }
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

void append_metric(std::string& line, const MetricSummary& m) {
  line += ',' + format_value(m.mean) + ',' + format_value(m.se) + ',' + std::to_string(m.count);
}

}  // namespace

int ExperimentConfig::effective_blocks() const {
  if (model != ModelKind::Sigma3) return 1;
  return blocks > 0 ? blocks : default_sigma3_blocks(p);
}

void ExperimentConfig::validate() const {
  if (p < 1) throw DomainError("p must be positive");
  if (n_train < 2) throw DomainError("n_train must be at least 2");
  if (n_valid < 1) throw DomainError("n_valid must be positive");
  if (replications < 1) throw DomainError("replications must be positive");
  if (blocks < 0) throw DomainError("blocks must be positive");
  if (model == ModelKind::Sigma3 && effective_blocks() > p) throw DomainError("blocks exceeds p");
  if (estimators.empty()) throw DomainError("estimator list is empty");
  fit.validate();
  for (std::size_t i = 0; i < estimators.size(); ++i) {
    if (!is_family(estimators[i])) throw ParseError("unknown estimator '" + estimators[i] + "'");
    for (std::size_t k = 0; k < i; ++k) {
      if (estimators[k] == estimators[i]) throw ParseError("estimator '" + estimators[i] + "' listed twice");
    }
  }
  for (const auto& [family, spec] : grids) {
    if (std::find(estimators.begin(), estimators.end(), family) == estimators.end()) {
      throw ParseError("grid given for '" + family + "', which is not in the estimator list");
    }
    parse_grid(family, spec, p, n_train);
  }
}

std::vector<std::pair<std::string, std::string>> config_keys() {
  return {
      {"model", "sigma1 | sigma2 | sigma3 (default sigma1)"},
      {"p", "dimension (default 30)"},
      {"blocks", "sigma3 block count (default 1 below p=100, 3 below p=200, else 6)"},
      {"sigma3_layout", "start | width: draw k_j as first predictor or as row bandwidth (default start)"},
      {"distribution", "gaussian | t3 (default gaussian)"},
      {"n_train", "training observations (default 100)"},
      {"n_valid", "validation observations (default 100)"},
      {"replications", "number of replications (default 50)"},
      {"estimators", "comma list of sample, ledoit-wolf, banding, lasso, j0, j1, j2"},
      {"grid.<family>", "tuning grid for one estimator, e.g. grid.lasso = lambda=1e-3..1e2/10"},
      {"seed", "base RNG seed (default 1)"},
      {"output_dir", "where reports are written"},
      {"fixed_truth", "true: one sigma3 draw for all replications (default false)"},
      {"save_fits", "true: also write every fitted factor and precision (default false)"},
      {"solver", "lqa | shooting (default shooting)"},
      {"max_iters", "iteration cap per row (default 100)"},
      {"rel_tol", "relative objective change that stops a row (default 1e-6)"},
      {"zero_threshold", "final hard-zero cutoff (default 1e-10)"},
      {"stability_floor", "in-iteration cutoff for LQA (default 1e-10)"},
  };
}

void apply_config_value(ExperimentConfig& c, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "model") {
    c.model = parse_model(value);
  } else if (key == "p") {
    c.p = parse_integer<Index>(key, value);
  } else if (key == "blocks") {
    c.blocks = parse_integer<int>(key, value);
  } else if (key == "sigma3_layout") {
    c.layout = parse_sigma3_layout(value);
  } else if (key == "distribution") {
    c.distribution = parse_distribution(value);
  } else if (key == "n_train") {
    c.n_train = parse_integer<Index>(key, value);
  } else if (key == "n_valid") {
    c.n_valid = parse_integer<Index>(key, value);
  } else if (key == "replications") {
    c.replications = parse_integer<int>(key, value);
  } else if (key == "estimators") {
    c.estimators = split_list(value);
  } else if (key.rfind("grid.", 0) == 0) {
    const std::string family = key.substr(5);
    if (!is_family(family)) throw ParseError("unknown estimator '" + family + "' in " + key);
    c.grids[family] = value;
  } else if (key == "seed") {
    c.seed = parse_integer<std::uint64_t>(key, value);
  } else if (key == "output_dir") {
    c.output_dir = value;
  } else if (key == "fixed_truth") {
    c.fixed_truth = parse_bool(key, value);
  } else if (key == "save_fits") {
    c.save_fits = parse_bool(key, value);
  } else if (key == "solver") {
    if (value == "lqa") {
      c.fit.solver = Solver::Lqa;
    } else if (value == "shooting") {
      c.fit.solver = Solver::Shooting;
    } else {
      throw ParseError("solver: '" + value + "' (expected lqa or shooting)");
    }
  } else if (key == "max_iters") {
    c.fit.max_iters = parse_integer<int>(key, value);
  } else if (key == "rel_tol") {
    c.fit.rel_tol = parse_real(key, value);
  } else if (key == "zero_threshold") {
    c.fit.zero_threshold = parse_real(key, value);
  } else if (key == "stability_floor") {
    c.fit.stability_floor = parse_real(key, value);
  } else {
    throw ParseError("unknown key '" + key + "'");
  }
}

ExperimentConfig parse_config(const std::string& text, const std::string& source, ExperimentConfig base) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string at = source + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) throw ParseError(at + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    try {
      apply_config_value(base, key, line.substr(eq + 1));
    } catch (const ParseError& e) {
      throw ParseError(at + e.what());
    }
  }
  return base;
}

ExperimentConfig read_config(const std::string& path) {
  return parse_config(read_text(path), path);
}

std::string config_to_text(const ExperimentConfig& c) {
  std::string out;
  auto put = [&](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
  put("model", model_name(c.model));
  put("p", std::to_string(c.p));
  if (c.model == ModelKind::Sigma3) {
    put("blocks", std::to_string(c.effective_blocks()));
    put("sigma3_layout", sigma3_layout_name(c.layout));
    put("fixed_truth", c.fixed_truth ? "true" : "false");
  }
  put("distribution", distribution_name(c.distribution));
  put("n_train", std::to_string(c.n_train));
  put("n_valid", std::to_string(c.n_valid));
  put("replications", std::to_string(c.replications));
  std::string list;
  for (const auto& e : c.estimators) list += (list.empty() ? "" : ",") + e;
  put("estimators", list);
  for (const auto& [family, spec] : c.grids) put("grid." + family, spec);
  put("seed", std::to_string(c.seed));
  put("solver", solver_name(c.fit.solver));
  put("max_iters", std::to_string(c.fit.max_iters));
  put("rel_tol", format_number(c.fit.rel_tol));
  put("zero_threshold", format_number(c.fit.zero_threshold));
  put("stability_floor", format_number(c.fit.stability_floor));
  put("save_fits", c.save_fits ? "true" : "false");
  return out;
}

MetricSummary summarize(const std::vector<MaybeValue>& values) {
  MetricSummary m;
  double sum = 0.0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++m.count;
    }
  }
  if (m.count == 0) return m;
  const double mean = sum / m.count;
  m.mean = mean;
  if (m.count < 2) return m;
  double ss = 0.0;
  for (const auto& v : values) {
    if (v) ss += (*v - mean) * (*v - mean);
  }
  m.se = std::sqrt(ss / (m.count - 1)) / std::sqrt(static_cast<double>(m.count));
  return m;
}

int default_thread_count() {
  if (const char* env = std::getenv("NESTBAND_THREADS")) {
    int v = 0;
    const std::string s = env;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size() && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ExperimentReport run_benchmark(const ExperimentConfig& config, int threads) {
  config.validate();
  ExperimentReport report;
  report.config = config;
  const int reps = config.replications;
  const std::size_t E = config.estimators.size();

  std::optional<CovModel> shared;
  if (config.model != ModelKind::Sigma3 || config.fixed_truth) {
    shared = truth_for(config, 0);
    if (!shared->warning.empty()) report.warnings.push_back(shared->warning);
  }

  const int workers = std::clamp(threads > 0 ? threads : default_thread_count(), 1, reps);
  std::vector<RepOutput> outputs(static_cast<std::size_t>(reps));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(reps));
  std::vector<std::vector<ZeroCounts>> counts(static_cast<std::size_t>(workers), std::vector<ZeroCounts>(E));
  std::atomic<int> next{0};
  auto work = [&](int w) {
    for (int r = next++; r < reps; r = next++) {
      try {
        outputs[static_cast<std::size_t>(r)] =
            run_replication(config, shared ? &*shared : nullptr, r, counts[static_cast<std::size_t>(w)]);
      } catch (...) {
        errors[static_cast<std::size_t>(r)] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (auto& o : outputs) {
    for (auto& row : o.rows) report.rows.push_back(std::move(row));
    for (auto& w : o.warnings) report.warnings.push_back(std::move(w));
  }

  for (std::size_t e = 0; e < E; ++e) {
    EstimatorSummary s;
    s.estimator = config.estimators[e];
    std::vector<MaybeValue> kl, ent, l1, l2, fro, linf, zc, zp;
    for (const auto& row : report.rows) {
      if (row.estimator != s.estimator) continue;
      const auto norm = [&](double v) { return row.failed ? MaybeValue{} : MaybeValue{v}; };
      kl.push_back(row.losses.kl);
      ent.push_back(row.losses.entropy);
      l1.push_back(norm(row.losses.norms.l1));
      l2.push_back(norm(row.losses.norms.l2));
      fro.push_back(norm(row.losses.norms.frobenius));
      linf.push_back(norm(row.losses.norms.linf));
      zc.push_back(row.losses.pct_zeros_cholesky);
      zp.push_back(row.losses.pct_zeros_precision);
    }
    s.kl = summarize(kl);
    s.entropy = summarize(ent);
    s.l1 = summarize(l1);
    s.l2 = summarize(l2);
    s.frobenius = summarize(fro);
    s.linf = summarize(linf);
    s.zeros_cholesky = summarize(zc);
    s.zeros_precision = summarize(zp);
    for (const auto& per_worker : counts) {
      const ZeroCounts& z = per_worker[e];
      if (z.fits == 0) continue;
      if (s.fits == 0) {
        s.zero_freq_factor = z.factor;
        s.zero_freq_precision = z.precision;
      } else {
        s.zero_freq_factor += z.factor;
        s.zero_freq_precision += z.precision;
      }
      s.fits += z.fits;
    }
    if (s.fits > 0) {
      s.zero_freq_factor /= static_cast<double>(s.fits);
      s.zero_freq_precision /= static_cast<double>(s.fits);
    }
    report.summary.push_back(std::move(s));
  }
  return report;
}

std::string summary_csv(const ExperimentReport& report) {
  std::string out = "estimator,replications";
  for (const char* m : {"kl", "entropy", "l1", "l2", "frobenius", "linf", "zeros_cholesky", "zeros_precision"}) {
    out += std::string(",") + m + "_mean," + m + "_se," + m + "_n";
  }
  out += '\n';
  for (const auto& s : report.summary) {
    std::string line = s.estimator + ',' + std::to_string(report.config.replications);
    for (const MetricSummary* m : {&s.kl, &s.entropy, &s.l1, &s.l2, &s.frobenius, &s.linf,
                                   &s.zeros_cholesky, &s.zeros_precision}) {
      append_metric(line, *m);
    }
    out += line + '\n';
  }
  return out;
}

std::string replications_csv(const ExperimentReport& report) {
  std::string out =
      "estimator,replication,parameters,kl,entropy,l1,l2,frobenius,linf,zeros_cholesky,zeros_precision,"
      "bandwidth\n";
  for (const auto& r : report.rows) {
    const auto norm = [&](double v) { return r.failed ? std::string("NA") : format_number(v); };
    out += r.estimator + ',' + std::to_string(r.replication) + ',' + r.parameters + ',' +
           format_value(r.losses.kl) + ',' + format_value(r.losses.entropy) + ',' + norm(r.losses.norms.l1) +
           ',' + norm(r.losses.norms.l2) + ',' + norm(r.losses.norms.frobenius) + ',' +
           norm(r.losses.norms.linf) + ',' + format_value(r.losses.pct_zeros_cholesky) + ',' +
           format_value(r.losses.pct_zeros_precision) + ',' +
           (r.bandwidth < 0 ? std::string("NA") : std::to_string(r.bandwidth)) + '\n';
  }
  return out;
}

void write_report(const ExperimentReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir + "'");
  const fs::path root(dir);
  write_text((root / "summary.csv").string(), summary_csv(report));
  write_text((root / "replications.csv").string(), replications_csv(report));
  std::string warnings;
  for (const auto& w : report.warnings) warnings += w + '\n';
  write_text((root / "warnings.txt").string(), warnings);
  write_text((root / "config.txt").string(), config_to_text(report.config));
  for (const auto& s : report.summary) {
    if (s.fits == 0) continue;
    write_matrix_csv((root / ("zero_freq_" + s.estimator + "_factor.csv")).string(), s.zero_freq_factor);
    write_matrix_csv((root / ("zero_freq_" + s.estimator + "_precision.csv")).string(), s.zero_freq_precision);
  }
  if (!report.config.save_fits) return;
  for (const auto& r : report.rows) {
    if (r.factor.size() == 0) continue;
    const fs::path sub = root / "fits" / r.estimator;
    fs::create_directories(sub, ec);
    if (ec) throw IoError("cannot create '" + sub.string() + "'");
    char name[32];
    std::snprintf(name, sizeof name, "rep_%03d", r.replication);
    write_matrix_csv((sub / (std::string(name) + "_factor.csv")).string(), r.factor);
    write_matrix_csv((sub / (std::string(name) + "_precision.csv")).string(), r.precision);
  }
}

}  // namespace nestband
