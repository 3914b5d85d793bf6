#pragma once

// Losses between a true covariance and an estimate. Values that cannot be
// computed (singular estimate, no true zeros) are std::nullopt and print as
// "NA".

#include "nestband/cholcore.hpp"
#include "nestband/estimate.hpp"

#include <optional>
#include <span>
#include <utility>

namespace nestband {

using MaybeValue = std::optional<double>;

/// tr(S_hat^{-1} S) - ln|S_hat^{-1} S| - p. NA when S_hat is singular.
MaybeValue kl_loss(const Matrix& sigma_true, const Matrix& sigma_hat);

/// tr(S^{-1} S_hat) - ln|S^{-1} S_hat| - p. NA when S_hat is singular.
MaybeValue entropy_loss(const Matrix& sigma_true, const Matrix& sigma_hat);

struct NormLosses {
  double l1 = 0.0;        // max column abs sum
  double l2 = 0.0;        // largest singular value
  double frobenius = 0.0;
  double linf = 0.0;      // max row abs sum
};

NormLosses norm_losses(const Matrix& sigma_true, const Matrix& sigma_hat);

struct ZeroRecovery {
  MaybeValue pct_cholesky;
  MaybeValue pct_precision;
};

/// Entry of a reconstructed precision counted as zero: |x| <= max(zero_tol,
/// 1e-12 max|entry|).
double precision_zero_cutoff(const Matrix& precision, double zero_tol);

ZeroRecovery zero_recovery(const CholeskyFactors& true_factors,
                           const CholeskyFactors& est_factors, double zero_tol = 0.0);

enum class ZeroLevel { Factor, Precision };

/// Fraction of fits in which each entry is zero. The diagonal is reported
/// as 0. Precision-level fits use the relative cutoff above.
Matrix zero_frequency(std::span<const Matrix> fits, ZeroLevel level, double zero_tol = 0.0);

struct LossReport {
  MaybeValue kl;
  MaybeValue entropy;
  NormLosses norms;
  MaybeValue pct_zeros_cholesky;
  MaybeValue pct_zeros_precision;
};

/// Every loss of one estimate against one truth. Estimates without factors
/// (sample, Ledoit-Wolf) get factors through exact population regressions on
/// their covariance when it is nonsingular.
LossReport evaluate_estimate(const CholeskyFactors& true_factors, const Matrix& sigma_true,
                             const Estimate& estimate, double zero_tol = 0.0);

}  // namespace nestband
