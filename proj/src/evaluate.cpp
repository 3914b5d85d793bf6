#include "nestband/evaluate.hpp"

#include "nestband/error.hpp"

#include <algorithm>
#include <cmath>

namespace nestband {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw DomainError("loss arguments must be square matrices of equal size");
  }
}

double log_det(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
}

// tr(A^{-1} B) - ln|A^{-1} B| - p for SPD A (factored) and B.
double stein_loss(const Eigen::LLT<Matrix>& a, double log_det_b, const Matrix& b) {
  const double p = static_cast<double>(b.rows());
  const double trace = a.solve(b).trace();
  return std::max(0.0, trace - (log_det_b - log_det(a)) - p);
}

}  // namespace

MaybeValue kl_loss(const Matrix& sigma_true, const Matrix& sigma_hat) {
  require_same_shape(sigma_true, sigma_hat);
  const auto truth = spd_factor(sigma_true);
  if (!truth) throw DomainError("true covariance is not positive definite");
  if (sigma_hat == sigma_true) return 0.0;  // exact, not up to roundoff
  const auto est = spd_factor(sigma_hat);
  if (!est) return std::nullopt;
  return stein_loss(*est, log_det(*truth), sigma_true);
}

MaybeValue entropy_loss(const Matrix& sigma_true, const Matrix& sigma_hat) {
  require_same_shape(sigma_true, sigma_hat);
  const auto truth = spd_factor(sigma_true);
  if (!truth) throw DomainError("true covariance is not positive definite");
  if (sigma_hat == sigma_true) return 0.0;
  const auto est = spd_factor(sigma_hat);
  if (!est) return std::nullopt;
  return stein_loss(*truth, log_det(*est), sigma_hat);
}

NormLosses norm_losses(const Matrix& sigma_true, const Matrix& sigma_hat) {
  require_same_shape(sigma_true, sigma_hat);
  const Matrix diff = sigma_hat - sigma_true;
  NormLosses out;
  out.l1 = diff.cwiseAbs().colwise().sum().maxCoeff();
  out.linf = diff.cwiseAbs().rowwise().sum().maxCoeff();
  out.frobenius = diff.norm();
  Eigen::JacobiSVD<Matrix> svd(diff);
  out.l2 = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
  return out;
}

double precision_zero_cutoff(const Matrix& precision, double zero_tol) {
  const double scale = precision.size() > 0 ? precision.cwiseAbs().maxCoeff() : 0.0;
  return std::max(zero_tol, 1e-12 * scale);
}

ZeroRecovery zero_recovery(const CholeskyFactors& true_factors, const CholeskyFactors& est_factors,
                           double zero_tol) {
  if (true_factors.p() != est_factors.p()) throw DomainError("factor dimensions differ");
  const Index p = true_factors.p();
  const Matrix true_omega = reconstruct_precision(true_factors);
  const Matrix est_omega = reconstruct_precision(est_factors);
  const double omega_cut = precision_zero_cutoff(est_omega, zero_tol);

  long chol_true = 0, chol_hit = 0, prec_true = 0, prec_hit = 0;
  for (Index j = 1; j < p; ++j) {
    for (Index l = 0; l < j; ++l) {
      if (true_factors.phi()(j, l) == 0.0) {
        ++chol_true;
        if (std::abs(est_factors.phi()(j, l)) <= zero_tol) ++chol_hit;
      }
      if (true_omega(j, l) == 0.0) {
        ++prec_true;
        if (std::abs(est_omega(j, l)) <= omega_cut) ++prec_hit;
      }
    }
  }
  ZeroRecovery out;
  if (chol_true > 0) out.pct_cholesky = 100.0 * static_cast<double>(chol_hit) / static_cast<double>(chol_true);
  if (prec_true > 0) out.pct_precision = 100.0 * static_cast<double>(prec_hit) / static_cast<double>(prec_true);
  return out;
}

Matrix zero_frequency(std::span<const Matrix> fits, ZeroLevel level, double zero_tol) {
  if (fits.empty()) throw DomainError("zero_frequency needs at least one fit");
  const Index rows = fits.front().rows();
  const Index cols = fits.front().cols();
  Matrix counts = Matrix::Zero(rows, cols);
  for (const Matrix& fit : fits) {
    if (fit.rows() != rows || fit.cols() != cols) throw DomainError("fits differ in shape");
    const double cut = level == ZeroLevel::Precision ? precision_zero_cutoff(fit, zero_tol) : zero_tol;
    counts += (fit.array().abs() <= cut).cast<double>().matrix();
  }
  counts /= static_cast<double>(fits.size());
  for (Index i = 0; i < std::min(rows, cols); ++i) counts(i, i) = 0.0;
  return counts;
}

LossReport evaluate_estimate(const CholeskyFactors& true_factors, const Matrix& sigma_true,
                             const Estimate& estimate, double zero_tol) {
  LossReport r;
  r.norms = norm_losses(sigma_true, estimate.covariance);
  if (!estimate.singular) {
    r.kl = kl_loss(sigma_true, estimate.covariance);
    r.entropy = entropy_loss(sigma_true, estimate.covariance);
  }
  std::optional<CholeskyFactors> est_factors = estimate.factors;
  if (!est_factors && !estimate.singular) {
    try {
      est_factors = factors_from_covariance(estimate.covariance);
    } catch (const DomainError&) {
      est_factors.reset();
    }
  }
  if (est_factors) {
    const ZeroRecovery z = zero_recovery(true_factors, *est_factors, zero_tol);
    r.pct_zeros_cholesky = z.pct_cholesky;
    r.pct_zeros_precision = z.pct_precision;
  }
  return r;
}

}  // namespace nestband
