#pragma once

// Modified Cholesky decomposition of a covariance matrix,
//
//   Sigma^{-1} = T' D^{-1} T,   T = I - Phi,
//
// where row j of Phi holds the coefficients of the regression of variable j
// on its predecessors 0..j-1 and D holds the residual (innovation) variances.
// Indices are zero-based throughout: row j has exactly j coefficients.

#include <Eigen/Dense>

namespace nestband {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Observation matrix, one observation per row.
struct Dataset {
  Matrix values;          // n x p
  bool centered = false;  // own column means subtracted
  Vector column_means;    // means that were subtracted (zeros when raw)

  Index n() const { return values.rows(); }
  Index p() const { return values.cols(); }
};

/// Wraps raw values as an uncentered dataset. Requires n >= 1, p >= 1.
Dataset make_dataset(Matrix values);

/// Subtracts the dataset's own column means. Requires n >= 2.
Dataset center(const Dataset& data);

/// Subtracts externally supplied means (e.g. training means applied to a
/// validation set). The result is not flagged as centered.
Dataset shift_by(const Dataset& data, const Vector& means);

/// Throws DomainError unless `data` carries the centered flag.
void require_centered(const Dataset& data, const char* who);

class CholeskyFactors {
 public:
  CholeskyFactors() = default;
  /// `phi` must be p x p; only its strictly lower triangle is kept.
  CholeskyFactors(Matrix phi, Vector variances);

  /// T = I, D = diag(variances).
  static CholeskyFactors diagonal(Vector variances);

  Index p() const { return variances_.size(); }
  const Matrix& phi() const { return phi_; }
  const Vector& variances() const { return variances_; }

  /// Coefficients of row j, ordered by predecessor index (length j).
  Vector row(Index j) const { return phi_.row(j).head(j).transpose(); }
  void set_row(Index j, const Vector& coefficients);
  void set_variance(Index j, double sigma2) { variances_(j) = sigma2; }

  /// Unit lower triangular T = I - Phi.
  Matrix t() const;

  /// Throws DomainError naming the first row with a non-positive variance.
  void require_positive_variances() const;

 private:
  Matrix phi_;
  Vector variances_;
};

/// T' D^{-1} T, symmetrized.
Matrix reconstruct_precision(const CholeskyFactors& factors);

/// T^{-1} D T^{-T} via a unit-triangular solve, symmetrized.
Matrix reconstruct_covariance(const CholeskyFactors& factors);

/// sum_j log sigma_j^2.
double log_det_covariance(const CholeskyFactors& factors);

/// n log|D| + sum_i x_i' T' D^{-1} T x_i (Gaussian constant omitted).
double neg_log_likelihood(const CholeskyFactors& factors, const Dataset& data);

/// n log sigma2 + RSS_j(phi) / sigma2 for row j.
double row_neg_log_likelihood(Index j, const Vector& phi, double sigma2,
                              const Dataset& data);

/// Per-row residual fit.
struct RowFit {
  Index j = 0;
  Vector phi;
  double sigma2 = 0.0;
  Vector residuals;
  bool degenerate = false;  // sigma2 clamped to the variance floor
};

/// Lower bound on an innovation variance: 1e-12 times the mean square of
/// column j (or 1e-12 if that column is identically zero).
double variance_floor(const Dataset& data, Index j);

/// Closed-form variance step: sigma2 = RSS / n, floored.
RowFit update_sigma(Index j, const Vector& phi, const Dataset& data);

/// Exact population regressions of each variable on its predecessors,
/// computed from the blocks of an SPD matrix.
CholeskyFactors factors_from_covariance(const Matrix& sigma);

}  // namespace nestband
