#include "nestband/cholcore.hpp"

#include "nestband/error.hpp"

#include <cmath>
#include <string>

namespace nestband {

namespace {

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double row_rss(Index j, const Vector& phi, const Dataset& data) {
  if (phi.size() != j) {
    throw DomainError("row " + std::to_string(j) + " expects " + std::to_string(j) +
                      " coefficients, got " + std::to_string(phi.size()));
  }
  Vector resid = data.values.col(j);
  if (j > 0) resid.noalias() -= data.values.leftCols(j) * phi;
  return resid.squaredNorm();
}

}  // namespace

Dataset make_dataset(Matrix values) {
  if (values.rows() < 1 || values.cols() < 1) {
    throw DomainError("dataset needs at least one observation and one variable");
  }
  if (!values.allFinite()) throw DomainError("dataset contains non-finite values");
  Dataset d;
  d.column_means = Vector::Zero(values.cols());
  d.values = std::move(values);
  return d;
}

Dataset center(const Dataset& data) {
  if (data.n() < 2) throw DomainError("centering needs n >= 2 observations");
  Dataset d;
  d.column_means = data.values.colwise().mean().transpose();
  d.values = data.values.rowwise() - d.column_means.transpose();
  d.centered = true;
  return d;
}

Dataset shift_by(const Dataset& data, const Vector& means) {
  if (means.size() != data.p()) throw DomainError("mean vector length does not match p");
  Dataset d;
  d.values = data.values.rowwise() - means.transpose();
  d.column_means = means;
  d.centered = false;
  return d;
}

void require_centered(const Dataset& data, const char* who) {
  if (!data.centered) throw DomainError(std::string(who) + ": data must be centered");
}

CholeskyFactors::CholeskyFactors(Matrix phi, Vector variances)
    : phi_(std::move(phi)), variances_(std::move(variances)) {
  const Index p = variances_.size();
  if (phi_.rows() != p || phi_.cols() != p) {
    throw DomainError("coefficient matrix must be p x p");
  }
  phi_.triangularView<Eigen::Upper>().setZero();
}

CholeskyFactors CholeskyFactors::diagonal(Vector variances) {
  const Index p = variances.size();
  return CholeskyFactors(Matrix::Zero(p, p), std::move(variances));
}

void CholeskyFactors::set_row(Index j, const Vector& coefficients) {
  if (coefficients.size() != j) throw DomainError("row length must equal row index");
  phi_.row(j).head(j) = coefficients.transpose();
}

Matrix CholeskyFactors::t() const {
  Matrix t = -phi_;
  t.diagonal().setOnes();
  return t;
}

void CholeskyFactors::require_positive_variances() const {
  for (Index j = 0; j < p(); ++j) {
    if (!(variances_(j) > 0.0)) {
      throw DomainError("innovation variance of row " + std::to_string(j) +
                        " is not positive");
    }
  }
}

Matrix reconstruct_precision(const CholeskyFactors& factors) {
  factors.require_positive_variances();
  const Matrix t = factors.t();
  const Vector inv_d = factors.variances().cwiseInverse();
  return symmetrized(t.transpose() * inv_d.asDiagonal() * t);
}

Matrix reconstruct_covariance(const CholeskyFactors& factors) {
  factors.require_positive_variances();
  const Index p = factors.p();
  Matrix t_inv = Matrix::Identity(p, p);
  factors.t().triangularView<Eigen::UnitLower>().solveInPlace(t_inv);
  return symmetrized(t_inv * factors.variances().asDiagonal() * t_inv.transpose());
}

double log_det_covariance(const CholeskyFactors& factors) {
  factors.require_positive_variances();
  return factors.variances().array().log().sum();
}

double row_neg_log_likelihood(Index j, const Vector& phi, double sigma2,
                              const Dataset& data) {
  if (!(sigma2 > 0.0)) {
    throw DomainError("row " + std::to_string(j) + ": variance must be positive");
  }
  const double n = static_cast<double>(data.n());
  return n * std::log(sigma2) + row_rss(j, phi, data) / sigma2;
}

double neg_log_likelihood(const CholeskyFactors& factors, const Dataset& data) {
  if (factors.p() != data.p()) throw DomainError("factor and data dimensions differ");
  double total = 0.0;
  for (Index j = 0; j < factors.p(); ++j) {
    total += row_neg_log_likelihood(j, factors.row(j), factors.variances()(j), data);
  }
  return total;
}

double variance_floor(const Dataset& data, Index j) {
  const double ms = data.values.col(j).squaredNorm() / static_cast<double>(data.n());
  return 1e-12 * (ms > 0.0 ? ms : 1.0);
}

RowFit update_sigma(Index j, const Vector& phi, const Dataset& data) {
  RowFit fit;
  fit.j = j;
  fit.phi = phi;
  if (phi.size() != j) throw DomainError("row length must equal row index");
  fit.residuals = data.values.col(j);
  if (j > 0) fit.residuals.noalias() -= data.values.leftCols(j) * phi;
  fit.sigma2 = fit.residuals.squaredNorm() / static_cast<double>(data.n());
  const double floor = variance_floor(data, j);
  if (fit.sigma2 < floor) {
    fit.sigma2 = floor;
    fit.degenerate = true;
  }
  return fit;
}

CholeskyFactors factors_from_covariance(const Matrix& sigma) {
  const Index p = sigma.rows();
  if (sigma.cols() != p) throw DomainError("covariance must be square");
  Matrix phi = Matrix::Zero(p, p);
  Vector d(p);
  d(0) = sigma(0, 0);
  for (Index j = 1; j < p; ++j) {
    Eigen::LLT<Matrix> llt(sigma.topLeftCorner(j, j));
    if (llt.info() != Eigen::Success) throw DomainError("covariance is not positive definite");
    const Vector cross = sigma.col(j).head(j);
    const Vector coef = llt.solve(cross);
    phi.row(j).head(j) = coef.transpose();
    d(j) = sigma(j, j) - cross.dot(coef);
  }
  if ((d.array() <= 0.0).any()) throw DomainError("covariance is not positive definite");
  return CholeskyFactors(std::move(phi), std::move(d));
}

}  // namespace nestband
