#pragma once

// Gaussian discriminant classifiers (LDA, QDA, naive Bayes) that plug in any
// covariance estimator of the toolkit.

#include "nestband/estimate.hpp"
#include "nestband/rng.hpp"
#include "nestband/select.hpp"

#include <string>
#include <vector>

namespace nestband {

enum class ClassifierKind { Lda, Qda, NaiveBayes };

std::string classifier_name(ClassifierKind kind);
/// "lda", "qda", "naive-bayes".
ClassifierKind parse_classifier(const std::string& name);

/// Observations with one label each. `classes` lists the distinct labels in
/// order; `labels[i]` indexes into it.
struct LabeledData {
  Matrix values;  // n x p, raw (uncentered)
  std::vector<int> labels;
  std::vector<std::string> classes;

  Index n() const { return values.rows(); }
  Index p() const { return values.cols(); }
};

/// Numeric labels sort by value, everything else lexicographically; numbers
/// come before non-numbers.
bool label_less(const std::string& a, const std::string& b);

/// Builds LabeledData from string labels, classes ordered by label_less.
LabeledData make_labeled(Matrix values, const std::vector<std::string>& labels);

/// Remaps `labels` onto an existing class list. Unknown labels get -1.
std::vector<int> encode_labels(const std::vector<std::string>& labels,
                               const std::vector<std::string>& classes);

struct ClassifierTuning {
  int folds = 5;
  RngSeed seed;
};

struct ClassModel {
  ClassifierKind kind = ClassifierKind::Lda;
  std::vector<std::string> classes;
  Matrix means;                    // K x p
  Vector log_priors;               // K
  std::vector<Matrix> precisions;  // 1 (LDA, naive Bayes) or K (QDA)
  Vector log_dets;                 // QDA: log|Sigma_k|
  EstimatorChoice estimator;       // selected candidate (unused for naive Bayes)
  std::vector<MaybeValue> cv_scores;

  Index p() const { return means.cols(); }
  Index k() const { return means.rows(); }
};

/// Fits class means and priors and the covariance part:
///   LDA: the estimator on pooled class-mean-centered residuals;
///   QDA: the estimator per class, one tuning value shared by all classes
///        and chosen on cross-validated likelihood summed over classes;
///   naive Bayes: diagonal of the pooled sample covariance (grid ignored).
/// A grid of one candidate skips cross-validation. Throws SingularError when
/// the estimator gives a singular covariance.
ClassModel fit_classifier(ClassifierKind kind, const LabeledData& train, const TuningGrid& grid,
                          const FitOptions& opts, const ClassifierTuning& tuning = {});

/// delta_k(x) for every class.
Vector discriminant_scores(const ClassModel& model, const Vector& x);

/// Argmax of the scores, ties toward the lower class index.
int predict(const ClassModel& model, const Vector& x);

struct TestError {
  Index errors = 0;
  Index total = 0;
  double rate = 0.0;
};

/// `labels` index into model.classes; -1 (unknown class) always counts as
/// an error.
TestError test_error(const ClassModel& model, const Matrix& values, const std::vector<int>& labels);

}  // namespace nestband
