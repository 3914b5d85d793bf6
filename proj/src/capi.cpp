#include "nestband/nestband.h"

#include "nestband/benchmark.hpp"
#include "nestband/classify.hpp"
#include "nestband/csv.hpp"
#include "nestband/error.hpp"

#include <cmath>
#include <new>
#include <string>
#include <vector>

using namespace nestband;

struct nb_matrix {
  Matrix m;
};
struct nb_estimator {
  TuningGrid grid;
  std::string family;
};
struct nb_fit {
  Estimate est;
  std::string parameters;
};
struct nb_model {
  CovModel model;
};
struct nb_labels {
  std::vector<std::string> items;
};
struct nb_classifier {
  ClassModel model;
  std::string parameters;
};
struct nb_config {
  ExperimentConfig config;
};
struct nb_report {
  ExperimentReport report;
  std::string summary;
  std::string replications;
};

namespace {

thread_local std::string g_last_error;

nb_status fail(nb_status s, const std::string& message) {
  g_last_error = message;
  return s;
}

template <typename F>
nb_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return NB_OK;
  } catch (const ParseError& e) {
    return fail(NB_ERR_PARSE, e.what());
  } catch (const IoError& e) {
    return fail(NB_ERR_IO, e.what());
  } catch (const SingularError& e) {
    return fail(NB_ERR_SINGULAR, e.what());
  } catch (const DomainError& e) {
    return fail(NB_ERR_DOMAIN, e.what());
  } catch (const InternalError& e) {
    return fail(NB_ERR_INTERNAL, std::string("internal error: ") + e.what());
  } catch (const std::bad_alloc&) {
    return fail(NB_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(NB_ERR_INTERNAL, e.what());
  }
}

struct ArgumentError {
  std::string message;
};

template <typename F>
nb_status checked(F&& body) {
  try {
    return guarded(std::forward<F>(body));
  } catch (const ArgumentError& e) {
    return fail(NB_ERR_ARGUMENT, e.message);
  }
}

template <typename T>
void need(const T* p, const char* what) {
  if (!p) throw ArgumentError{std::string(what) + " is null"};
}

std::string text_or(const char* s, const char* fallback) { return s ? s : fallback; }

FitOptions to_options(const nb_fit_options* o) {
  FitOptions f;
  if (!o) return f;
  if (o->solver != NB_SOLVER_LQA && o->solver != NB_SOLVER_SHOOTING) throw ArgumentError{"unknown solver"};
  f.solver = o->solver == NB_SOLVER_LQA ? Solver::Lqa : Solver::Shooting;
  f.max_iters = o->max_iters;
  f.rel_tol = o->rel_tol;
  f.zero_threshold = o->zero_threshold;
  f.stability_floor = o->stability_floor;
  f.validate();
  return f;
}

void give(Matrix m, nb_matrix** out) { *out = new nb_matrix{std::move(m)}; }

Vector to_vector(const std::vector<Index>& v) {
  Vector out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Index>(i)) = static_cast<double>(v[i]);
  return out;
}

}  // namespace

extern "C" {

const char* nb_last_error(void) { return g_last_error.c_str(); }
const char* nb_version(void) { return "0.1.0"; }
const char* nb_rng_algorithm(void) { return kRngAlgorithm; }

nb_status nb_matrix_create(size_t rows, size_t cols, const double* values, nb_matrix** out) {
  return checked([&] {
    need(out, "out");
    if (rows == 0 || cols == 0) throw ArgumentError{"matrix dimensions must be positive"};
    need(values, "values");
    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (size_t r = 0; r < rows; ++r)
      for (size_t c = 0; c < cols; ++c) m(static_cast<Index>(r), static_cast<Index>(c)) = values[r * cols + c];
    give(std::move(m), out);
  });
}

nb_status nb_matrix_read_csv(const char* path, nb_matrix** out) {
  return checked([&] {
    need(path, "path");
    need(out, "out");
    give(read_matrix_csv(path), out);
  });
}

nb_status nb_matrix_write_csv(const nb_matrix* m, const char* path) {
  return checked([&] {
    need(m, "matrix");
    need(path, "path");
    write_matrix_csv(path, m->m);
  });
}

size_t nb_matrix_rows(const nb_matrix* m) { return m ? static_cast<size_t>(m->m.rows()) : 0; }
size_t nb_matrix_cols(const nb_matrix* m) { return m ? static_cast<size_t>(m->m.cols()) : 0; }

nb_status nb_matrix_get(const nb_matrix* m, size_t row, size_t col, double* out) {
  return checked([&] {
    need(m, "matrix");
    need(out, "out");
    if (row >= nb_matrix_rows(m) || col >= nb_matrix_cols(m)) throw ArgumentError{"index out of range"};
    *out = m->m(static_cast<Index>(row), static_cast<Index>(col));
  });
}

nb_status nb_matrix_copy(const nb_matrix* m, double* out, size_t capacity) {
  return checked([&] {
    need(m, "matrix");
    need(out, "out");
    const size_t rows = nb_matrix_rows(m), cols = nb_matrix_cols(m);
    if (capacity < rows * cols) throw ArgumentError{"output buffer too small"};
    for (size_t r = 0; r < rows; ++r)
      for (size_t c = 0; c < cols; ++c) out[r * cols + c] = m->m(static_cast<Index>(r), static_cast<Index>(c));
  });
}

void nb_matrix_free(nb_matrix* m) { delete m; }

nb_fit_options nb_fit_options_default(void) {
  const FitOptions f;
  nb_fit_options o;
  o.solver = f.solver == Solver::Lqa ? NB_SOLVER_LQA : NB_SOLVER_SHOOTING;
  o.max_iters = f.max_iters;
  o.rel_tol = f.rel_tol;
  o.zero_threshold = f.zero_threshold;
  o.stability_floor = f.stability_floor;
  return o;
}

nb_status nb_estimator_create(const char* family, const char* grid, size_t p, size_t n, nb_estimator** out) {
  return checked([&] {
    need(family, "family");
    need(out, "out");
    if (!is_family(family)) throw ArgumentError{"unknown estimator '" + std::string(family) + "'"};
    if (p == 0 || n == 0) throw ArgumentError{"p and n must be positive"};
    TuningGrid g = parse_grid(family, text_or(grid, ""), static_cast<Index>(p), static_cast<Index>(n));
    *out = new nb_estimator{std::move(g), family};
  });
}

size_t nb_estimator_candidates(const nb_estimator* e) { return e ? e->grid.candidates.size() : 0; }
const char* nb_estimator_family(const nb_estimator* e) { return e ? e->family.c_str() : ""; }
void nb_estimator_free(nb_estimator* e) { delete e; }

nb_status nb_fit_kfold(const nb_matrix* data, const nb_estimator* e, const nb_fit_options* opts, int folds,
                       uint64_t seed, nb_fit** out) {
  return checked([&] {
    need(data, "data");
    need(e, "estimator");
    need(out, "out");
    const FitOptions fo = to_options(opts);
    const Dataset d = center(make_dataset(data->m));
    EstimatorChoice choice = e->grid.candidates.front();
    if (e->grid.candidates.size() > 1) choice = select_kfold(d, e->grid, folds, fo, {seed, 0}).best;
    *out = new nb_fit{fit_estimator(d, choice, fo), choice.parameters()};
  });
}

nb_status nb_fit_validation(const nb_matrix* train, const nb_matrix* valid, const nb_estimator* e,
                            const nb_fit_options* opts, nb_fit** out) {
  return checked([&] {
    need(train, "train");
    need(valid, "valid");
    need(e, "estimator");
    need(out, "out");
    const FitOptions fo = to_options(opts);
    const Dataset t = center(make_dataset(train->m));
    const Dataset v = shift_by(make_dataset(valid->m), t.column_means);
    Estimate est;
    const Selection s = select_on_validation(t, v, e->grid, fo, &est);
    *out = new nb_fit{std::move(est), s.best.parameters()};
  });
}

const char* nb_fit_parameters(const nb_fit* f) { return f ? f->parameters.c_str() : ""; }
int nb_fit_is_singular(const nb_fit* f) { return f && f->est.singular ? 1 : 0; }
int nb_fit_has_factors(const nb_fit* f) { return f && f->est.factors ? 1 : 0; }

nb_status nb_fit_covariance(const nb_fit* f, nb_matrix** out) {
  return checked([&] {
    need(f, "fit");
    need(out, "out");
    give(f->est.covariance, out);
  });
}

nb_status nb_fit_precision(const nb_fit* f, nb_matrix** out) {
  return checked([&] {
    need(f, "fit");
    need(out, "out");
    if (f->est.singular) throw SingularError("the estimate is singular; no precision matrix");
    give(f->est.precision, out);
  });
}

nb_status nb_fit_factor(const nb_fit* f, nb_matrix** out) {
  return checked([&] {
    need(f, "fit");
    need(out, "out");
    if (!f->est.factors) throw DomainError("this estimator has no Cholesky factor");
    give(f->est.factors->t(), out);
  });
}

nb_status nb_fit_variances(const nb_fit* f, nb_matrix** out) {
  return checked([&] {
    need(f, "fit");
    need(out, "out");
    if (!f->est.factors) throw DomainError("this estimator has no Cholesky factor");
    give(f->est.factors->variances(), out);
  });
}

nb_status nb_fit_bandwidths(const nb_fit* f, nb_matrix** out) {
  return checked([&] {
    need(f, "fit");
    need(out, "out");
    if (!f->est.factors) throw DomainError("this estimator has no Cholesky factor");
    give(to_vector(bandwidths(*f->est.factors)), out);
  });
}

void nb_fit_free(nb_fit* f) { delete f; }

nb_status nb_model_create(const char* name, size_t p, int blocks, const char* layout, uint64_t seed,
                          uint64_t stream, nb_model** out) {
  return checked([&] {
    need(name, "name");
    need(out, "out");
    if (p == 0) throw ArgumentError{"p must be positive"};
    const auto pp = static_cast<Index>(p);
    CovModel m;
    switch (parse_model(name)) {
      case ModelKind::Sigma1: m = make_sigma1(pp); break;
      case ModelKind::Sigma2: m = make_sigma2(pp); break;
      case ModelKind::Sigma3:
        m = make_sigma3(pp, blocks > 0 ? blocks : default_sigma3_blocks(pp), {seed, stream},
                        parse_sigma3_layout(text_or(layout, "start")));
        break;
    }
    *out = new nb_model{std::move(m)};
  });
}

nb_status nb_model_sigma(const nb_model* m, nb_matrix** out) {
  return checked([&] {
    need(m, "model");
    need(out, "out");
    give(m->model.sigma, out);
  });
}

nb_status nb_model_omega(const nb_model* m, nb_matrix** out) {
  return checked([&] {
    need(m, "model");
    need(out, "out");
    give(m->model.omega, out);
  });
}

nb_status nb_model_factor(const nb_model* m, nb_matrix** out) {
  return checked([&] {
    need(m, "model");
    need(out, "out");
    give(m->model.true_factors.t(), out);
  });
}

const char* nb_model_warning(const nb_model* m) { return m ? m->model.warning.c_str() : ""; }

nb_status nb_model_sample(const nb_model* m, const char* distribution, size_t n, uint64_t seed, uint64_t stream,
                          nb_matrix** out) {
  return checked([&] {
    need(m, "model");
    need(out, "out");
    if (n == 0) throw ArgumentError{"n must be positive"};
    const Distribution d = parse_distribution(text_or(distribution, "gaussian"));
    give(sample(m->model, d, static_cast<Index>(n), {seed, stream}).values, out);
  });
}

void nb_model_free(nb_model* m) { delete m; }

nb_status nb_kl_loss(const nb_matrix* sigma_true, const nb_matrix* sigma_hat, double* out, int* is_na) {
  return checked([&] {
    need(sigma_true, "sigma_true");
    need(sigma_hat, "sigma_hat");
    need(out, "out");
    const MaybeValue v = kl_loss(sigma_true->m, sigma_hat->m);
    *out = v ? *v : NAN;
    if (is_na) *is_na = v ? 0 : 1;
  });
}

nb_status nb_entropy_loss(const nb_matrix* sigma_true, const nb_matrix* sigma_hat, double* out, int* is_na) {
  return checked([&] {
    need(sigma_true, "sigma_true");
    need(sigma_hat, "sigma_hat");
    need(out, "out");
    const MaybeValue v = entropy_loss(sigma_true->m, sigma_hat->m);
    *out = v ? *v : NAN;
    if (is_na) *is_na = v ? 0 : 1;
  });
}

nb_status nb_norm_losses(const nb_matrix* sigma_true, const nb_matrix* sigma_hat, double out[4]) {
  return checked([&] {
    need(sigma_true, "sigma_true");
    need(sigma_hat, "sigma_hat");
    need(out, "out");
    const NormLosses n = norm_losses(sigma_true->m, sigma_hat->m);
    out[0] = n.l1;
    out[1] = n.l2;
    out[2] = n.frobenius;
    out[3] = n.linf;
  });
}

nb_status nb_zero_frequency(const nb_matrix* const* fits, size_t count, nb_level level, double zero_tol,
                            nb_matrix** out) {
  return checked([&] {
    need(out, "out");
    if (count > 0) need(fits, "fits");
    if (level != NB_LEVEL_FACTOR && level != NB_LEVEL_PRECISION) throw ArgumentError{"unknown level"};
    std::vector<Matrix> ms;
    for (size_t i = 0; i < count; ++i) {
      need(fits[i], "fit");
      ms.push_back(fits[i]->m);
    }
    give(zero_frequency(ms, level == NB_LEVEL_FACTOR ? ZeroLevel::Factor : ZeroLevel::Precision, zero_tol), out);
  });
}

nb_status nb_labeled_read_csv(const char* path, int label_col, nb_matrix** values, nb_labels** labels) {
  return checked([&] {
    need(path, "path");
    need(values, "values");
    need(labels, "labels");
    LabeledTable t = read_labeled_csv(path, label_col);
    *values = new nb_matrix{std::move(t.values)};
    *labels = new nb_labels{std::move(t.labels)};
  });
}

nb_status nb_labels_create(const char* const* labels, size_t count, nb_labels** out) {
  return checked([&] {
    need(out, "out");
    if (count > 0) need(labels, "labels");
    std::vector<std::string> items;
    for (size_t i = 0; i < count; ++i) {
      need(labels[i], "label");
      items.emplace_back(labels[i]);
    }
    *out = new nb_labels{std::move(items)};
  });
}

size_t nb_labels_count(const nb_labels* l) { return l ? l->items.size() : 0; }
const char* nb_labels_get(const nb_labels* l, size_t i) {
  return l && i < l->items.size() ? l->items[i].c_str() : "";
}
void nb_labels_free(nb_labels* l) { delete l; }

nb_status nb_classifier_fit(const char* kind, const nb_matrix* values, const nb_labels* labels,
                            const nb_estimator* e, const nb_fit_options* opts, int folds, uint64_t seed,
                            nb_classifier** out) {
  return checked([&] {
    need(kind, "kind");
    need(values, "values");
    need(labels, "labels");
    need(out, "out");
    const ClassifierKind k = parse_classifier(kind);
    if (k != ClassifierKind::NaiveBayes) need(e, "estimator");
    const LabeledData data = make_labeled(values->m, labels->items);
    const TuningGrid grid = e ? e->grid : TuningGrid{{EstimatorChoice::sample()}};
    ClassifierTuning tuning;
    tuning.folds = folds;
    tuning.seed = {seed, 0};
    ClassModel model = fit_classifier(k, data, grid, to_options(opts), tuning);
    std::string params = k == ClassifierKind::NaiveBayes ? "" : model.estimator.parameters();
    *out = new nb_classifier{std::move(model), std::move(params)};
  });
}

size_t nb_classifier_classes(const nb_classifier* c) { return c ? c->model.classes.size() : 0; }
const char* nb_classifier_class(const nb_classifier* c, size_t i) {
  return c && i < c->model.classes.size() ? c->model.classes[i].c_str() : "";
}
const char* nb_classifier_parameters(const nb_classifier* c) { return c ? c->parameters.c_str() : ""; }

nb_status nb_classifier_scores(const nb_classifier* c, const double* x, size_t p, double* out) {
  return checked([&] {
    need(c, "classifier");
    need(x, "x");
    need(out, "out");
    const Vector s = discriminant_scores(c->model, Eigen::Map<const Vector>(x, static_cast<Index>(p)));
    for (Index k = 0; k < s.size(); ++k) out[k] = s(k);
  });
}

nb_status nb_classifier_predict(const nb_classifier* c, const double* x, size_t p, size_t* class_index) {
  return checked([&] {
    need(c, "classifier");
    need(x, "x");
    need(class_index, "class_index");
    *class_index = static_cast<size_t>(predict(c->model, Eigen::Map<const Vector>(x, static_cast<Index>(p))));
  });
}

nb_status nb_classifier_test_error(const nb_classifier* c, const nb_matrix* values, const nb_labels* labels,
                                   size_t* errors, double* rate) {
  return checked([&] {
    need(c, "classifier");
    need(values, "values");
    need(labels, "labels");
    const TestError e = test_error(c->model, values->m, encode_labels(labels->items, c->model.classes));
    if (errors) *errors = static_cast<size_t>(e.errors);
    if (rate) *rate = e.rate;
  });
}

void nb_classifier_free(nb_classifier* c) { delete c; }

nb_status nb_config_create(nb_config** out) {
  return checked([&] {
    need(out, "out");
    *out = new nb_config{};
  });
}

nb_status nb_config_read(nb_config* c, const char* path) {
  return checked([&] {
    need(c, "config");
    need(path, "path");
    c->config = parse_config(read_text(path), path, c->config);
  });
}

nb_status nb_config_set(nb_config* c, const char* key, const char* value) {
  return checked([&] {
    need(c, "config");
    need(key, "key");
    need(value, "value");
    apply_config_value(c->config, key, value);
  });
}

namespace {
const std::vector<std::pair<std::string, std::string>>& key_table() {
  static const auto keys = config_keys();
  return keys;
}
}  // namespace

size_t nb_config_key_count(void) { return key_table().size(); }
const char* nb_config_key_name(size_t i) { return i < key_table().size() ? key_table()[i].first.c_str() : ""; }
const char* nb_config_key_help(size_t i) { return i < key_table().size() ? key_table()[i].second.c_str() : ""; }
const char* nb_config_output_dir(const nb_config* c) { return c ? c->config.output_dir.c_str() : ""; }
void nb_config_free(nb_config* c) { delete c; }

nb_status nb_benchmark_run(const nb_config* c, int threads, nb_report** out) {
  return checked([&] {
    need(c, "config");
    need(out, "out");
    ExperimentReport r = run_benchmark(c->config, threads);
    std::string s = summary_csv(r);
    std::string reps = replications_csv(r);
    *out = new nb_report{std::move(r), std::move(s), std::move(reps)};
  });
}

nb_status nb_report_write(const nb_report* r, const char* dir) {
  return checked([&] {
    need(r, "report");
    need(dir, "dir");
    write_report(r->report, dir);
  });
}

const char* nb_report_summary_csv(const nb_report* r) { return r ? r->summary.c_str() : ""; }
const char* nb_report_replications_csv(const nb_report* r) { return r ? r->replications.c_str() : ""; }
size_t nb_report_warning_count(const nb_report* r) { return r ? r->report.warnings.size() : 0; }
const char* nb_report_warning(const nb_report* r, size_t i) {
  return r && i < r->report.warnings.size() ? r->report.warnings[i].c_str() : "";
}
void nb_report_free(nb_report* r) { delete r; }

}  // extern "C"
