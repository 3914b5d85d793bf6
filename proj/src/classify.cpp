#include "nestband/classify.hpp"

#include "nestband/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>

namespace nestband {

namespace {

bool as_number(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return false;
  *out = v;
  return true;
}

Matrix rows_of(const Matrix& values, const std::vector<int>& labels, int k) {
  Index count = 0;
  for (int l : labels) count += (l == k);
  Matrix out(count, values.cols());
  Index r = 0;
  for (Index i = 0; i < values.rows(); ++i) {
    if (labels[static_cast<std::size_t>(i)] == k) out.row(r++) = values.row(i);
  }
  return out;
}

std::string singular_message(const EstimatorChoice& choice) {
  return "estimator '" + choice.family() +
         "' gives a singular covariance for this data; use a regularized estimator "
         "(banding, lasso, j1, j2 or ledoit-wolf)";
}

// Precision and log-determinant of a fitted covariance.
void invert(const Estimate& est, const EstimatorChoice& choice, Matrix* precision, double* log_det) {
  if (est.singular || est.precision.size() == 0) throw SingularError(singular_message(choice));
  *precision = est.precision;
  if (est.factors) {
    *log_det = log_det_covariance(*est.factors);
    return;
  }
  const auto llt = spd_factor(est.covariance);
  if (!llt) throw SingularError(singular_message(choice));
  *log_det = 2.0 * Matrix(llt->matrixL()).diagonal().array().log().sum();
}

Selection choose(const std::vector<Dataset>& parts, const TuningGrid& grid, const FitOptions& opts,
                 const ClassifierTuning& tuning) {
  if (grid.candidates.size() == 1) {
    Selection s;
    s.best = grid.candidates.front();
    s.scores = {std::nullopt};
    return s;
  }
  std::vector<MaybeValue> total(grid.candidates.size(), 0.0);
  for (const Dataset& part : parts) {
    const std::vector<MaybeValue> scores = kfold_scores(part, grid, tuning.folds, opts, tuning.seed);
    for (std::size_t c = 0; c < total.size(); ++c) {
      if (total[c] && scores[c]) {
        *total[c] += *scores[c];
      } else {
        total[c].reset();
      }
    }
  }
  try {
    return pick_best(grid, std::move(total));
  } catch (const DomainError&) {
    throw SingularError("no tuning candidate of '" + grid.family() +
                        "' gives a nonsingular covariance on every fold");
  }
}

}  // namespace

std::string classifier_name(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::Lda: return "lda";
    case ClassifierKind::Qda: return "qda";
    case ClassifierKind::NaiveBayes: return "naive-bayes";
  }
  return "";
}

ClassifierKind parse_classifier(const std::string& name) {
  if (name == "lda") return ClassifierKind::Lda;
  if (name == "qda") return ClassifierKind::Qda;
  if (name == "naive-bayes") return ClassifierKind::NaiveBayes;
  throw ParseError("unknown classifier '" + name + "' (expected lda, qda or naive-bayes)");
}

bool label_less(const std::string& a, const std::string& b) {
  double x = 0.0, y = 0.0;
  const bool na = as_number(a, &x);
  const bool nb = as_number(b, &y);
  if (na && nb) return x < y || (x == y && a < b);
  if (na != nb) return na;
  return a < b;
}

LabeledData make_labeled(Matrix values, const std::vector<std::string>& labels) {
  if (static_cast<Index>(labels.size()) != values.rows()) {
    throw DomainError("label count does not match the number of rows");
  }
  LabeledData d;
  d.classes = labels;
  std::sort(d.classes.begin(), d.classes.end(), label_less);
  d.classes.erase(std::unique(d.classes.begin(), d.classes.end()), d.classes.end());
  d.labels = encode_labels(labels, d.classes);
  d.values = std::move(values);
  return d;
}

std::vector<int> encode_labels(const std::vector<std::string>& labels,
                               const std::vector<std::string>& classes) {
  std::map<std::string, int> index;
  for (std::size_t k = 0; k < classes.size(); ++k) index[classes[k]] = static_cast<int>(k);
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    const auto it = index.find(l);
    out.push_back(it == index.end() ? -1 : it->second);
  }
  return out;
}

ClassModel fit_classifier(ClassifierKind kind, const LabeledData& train, const TuningGrid& grid,
                          const FitOptions& opts, const ClassifierTuning& tuning) {
  const Index n = train.n();
  const Index p = train.p();
  const int K = static_cast<int>(train.classes.size());
  if (K < 2) throw DomainError("classification needs at least 2 classes");
  if (static_cast<Index>(train.labels.size()) != n) throw DomainError("label count does not match rows");
  if (!train.values.allFinite()) throw DomainError("training values must be finite");

  ClassModel m;
  m.kind = kind;
  m.classes = train.classes;
  m.means = Matrix::Zero(K, p);
  m.log_priors = Vector::Zero(K);
  std::vector<Matrix> parts;
  for (int k = 0; k < K; ++k) {
    parts.push_back(rows_of(train.values, train.labels, k));
    const Index nk = parts.back().rows();
    if (nk < 2) {
      throw DomainError("class '" + train.classes[static_cast<std::size_t>(k)] +
                        "' has fewer than 2 training observations");
    }
    m.means.row(k) = parts.back().colwise().mean();
    m.log_priors(k) = std::log(static_cast<double>(nk) / static_cast<double>(n));
  }

  Matrix residuals(n, p);
  for (Index i = 0; i < n; ++i) {
    const int k = train.labels[static_cast<std::size_t>(i)];
    if (k < 0 || k >= K) throw DomainError("label index out of range");
    residuals.row(i) = train.values.row(i) - m.means.row(k);
  }

  if (kind == ClassifierKind::NaiveBayes) {
    const Vector var = residuals.colwise().squaredNorm().transpose() / static_cast<double>(n);
    if (!(var.minCoeff() > 0.0)) {
      throw SingularError("naive Bayes needs every variable to vary within classes");
    }
    m.precisions = {Matrix(var.cwiseInverse().asDiagonal())};
    return m;
  }

  grid.validate();
  if (kind == ClassifierKind::Lda) {
    const Dataset pooled = center(make_dataset(std::move(residuals)));
    const Selection s = choose({pooled}, grid, opts, tuning);
    m.estimator = s.best;
    m.cv_scores = s.scores;
    Matrix precision;
    double log_det = 0.0;
    invert(fit_estimator(pooled, s.best, opts), s.best, &precision, &log_det);
    m.precisions = {std::move(precision)};
    return m;
  }

  std::vector<Dataset> centered;
  for (Matrix& part : parts) centered.push_back(center(make_dataset(std::move(part))));
  const Selection s = choose(centered, grid, opts, tuning);
  m.estimator = s.best;
  m.cv_scores = s.scores;
  m.log_dets = Vector::Zero(K);
  for (int k = 0; k < K; ++k) {
    Matrix precision;
    invert(fit_estimator(centered[static_cast<std::size_t>(k)], s.best, opts), s.best, &precision,
           &m.log_dets(k));
    m.precisions.push_back(std::move(precision));
  }
  return m;
}

Vector discriminant_scores(const ClassModel& model, const Vector& x) {
  if (x.size() != model.p()) throw DomainError("observation length does not match the model");
  const Index K = model.k();
  Vector scores(K);
  if (model.kind == ClassifierKind::Qda) {
    for (Index k = 0; k < K; ++k) {
      const Vector d = x - model.means.row(k).transpose();
      scores(k) = -0.5 * model.log_dets(k) - 0.5 * d.dot(model.precisions[static_cast<std::size_t>(k)] * d) +
                  model.log_priors(k);
    }
    return scores;
  }
  const Matrix& omega = model.precisions.front();
  for (Index k = 0; k < K; ++k) {
    const Vector mu = model.means.row(k).transpose();
    const Vector w = omega * mu;
    scores(k) = x.dot(w) - 0.5 * mu.dot(w) + model.log_priors(k);
  }
  return scores;
}

int predict(const ClassModel& model, const Vector& x) {
  const Vector s = discriminant_scores(model, x);
  int best = 0;
  for (Index k = 1; k < s.size(); ++k) {
    if (s(k) > s(best)) best = static_cast<int>(k);
  }
  return best;
}

TestError test_error(const ClassModel& model, const Matrix& values, const std::vector<int>& labels) {
  if (static_cast<Index>(labels.size()) != values.rows()) throw DomainError("label count does not match rows");
  if (values.cols() != model.p()) throw DomainError("test data has " + std::to_string(values.cols()) +
                                                    " columns, the model expects " + std::to_string(model.p()));
  TestError e;
  e.total = values.rows();
  for (Index i = 0; i < values.rows(); ++i) {
    if (predict(model, values.row(i).transpose()) != labels[static_cast<std::size_t>(i)]) ++e.errors;
  }
  e.rate = e.total > 0 ? static_cast<double>(e.errors) / static_cast<double>(e.total) : 0.0;
  return e;
}

}  // namespace nestband
