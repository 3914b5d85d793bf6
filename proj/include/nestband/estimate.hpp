#pragma once

// Covariance estimators: adaptive banding (nested Lasso), Lasso on the
// Cholesky factor, nonadaptive banding, Ledoit-Wolf shrinkage and the sample
// covariance. Every Cholesky-based fit works row by row on the Gram matrix
// of centered data.

#include "nestband/cholcore.hpp"
#include "nestband/penalty.hpp"

#include <optional>
#include <string>

namespace nestband {

enum class Solver { Lqa, Shooting };

struct FitOptions {
  Solver solver = Solver::Shooting;
  int max_iters = 100;
  double rel_tol = 1e-6;          // relative change of the row objective
  double zero_threshold = 1e-10;  // final hard zero cutoff
  double stability_floor = 1e-10; // in-iteration cutoff (LQA)

  void validate() const;
};

/// Conditions met while fitting; none of them is fatal.
struct FitFlags {
  int degenerate_rows = 0;   // innovation variance clamped to its floor
  int jittered_solves = 0;   // ridge system needed diagonal jitter
  bool rank_deficient = false;  // OLS design without full column rank
  int iterations = 0;        // max iterations used over rows
  int unconverged_rows = 0;  // rows that hit max_iters
};

enum class Method { Sample, LedoitWolf, Banding, Lasso, Adaptive };

/// One fully specified estimator.
struct EstimatorChoice {
  Method method = Method::Sample;
  Index bandwidth = 0;  // Banding
  PenaltySpec penalty;  // Lasso (kind Lasso) and Adaptive (nested kinds)

  static EstimatorChoice sample() { return {Method::Sample, 0, {}}; }
  static EstimatorChoice ledoit_wolf() { return {Method::LedoitWolf, 0, {}}; }
  static EstimatorChoice banding(Index k) { return {Method::Banding, k, {}}; }
  static EstimatorChoice lasso(double lambda) {
    return {Method::Lasso, 0, {PenaltyKind::Lasso, lambda, 0.0}};
  }
  static EstimatorChoice adaptive(PenaltySpec spec) { return {Method::Adaptive, 0, spec}; }

  bool cholesky_based() const {
    return method == Method::Banding || method == Method::Lasso || method == Method::Adaptive;
  }
  /// Family name: sample, ledoit-wolf, banding, lasso, j0, j1, j2.
  std::string family() const;
  /// Tuning parameters as "key=value" pairs joined by ';' (empty if none).
  std::string parameters() const;
};

/// Any estimator's output in a common shape.
struct Estimate {
  Matrix covariance;
  Matrix precision;  // empty when singular
  std::optional<CholeskyFactors> factors;
  bool singular = false;
  FitFlags flags;
};

Matrix sample_covariance(const Dataset& data);

/// Shrinkage toward m I; `degenerate` is set when trace(S) = 0.
Matrix fit_ledoit_wolf(const Dataset& data, bool* degenerate = nullptr);

MarginalCoefs marginal_coefficients(const Dataset& data);

CholeskyFactors fit_adaptive_banding(const Dataset& data, const PenaltySpec& spec,
                                     const FitOptions& opts, FitFlags* flags = nullptr);

CholeskyFactors fit_lasso_cholesky(const Dataset& data, double lambda, const FitOptions& opts,
                                   FitFlags* flags = nullptr);

CholeskyFactors fit_banding(const Dataset& data, Index k, FitFlags* flags = nullptr);

/// Unpenalized OLS on all predecessors (banding with k = p - 1).
CholeskyFactors fit_ols_cholesky(const Dataset& data, FitFlags* flags = nullptr);

/// One LQA step for row j: exact minimizer of the ridge surrogate.
Vector lqa_row_update(Index j, const Vector& phi_prev, double sigma2, const Dataset& data,
                      const PenaltySpec& spec, const MarginalCoefs* marginals,
                      FitFlags* flags = nullptr);

/// One shooting sweep over row j, coordinates t = 0..j-1 in order, each
/// minimized exactly under the true penalty.
Vector shooting_row_update(Index j, const Vector& phi_prev, double sigma2, const Dataset& data,
                           const PenaltySpec& spec, const MarginalCoefs* marginals);

/// Penalized row objective n log sigma2 + RSS/sigma2 + J(phi); may be +inf.
double penalized_row_objective(Index j, const Vector& phi, double sigma2, const Dataset& data,
                               const PenaltySpec& spec, const MarginalCoefs* marginals);

/// Fits any estimator on centered data.
Estimate fit_estimator(const Dataset& data, const EstimatorChoice& choice,
                       const FitOptions& opts);

/// Cholesky factorization of an SPD matrix, or nullopt when the matrix is
/// not positive definite to working precision.
std::optional<Eigen::LLT<Matrix>> spd_factor(const Matrix& m);

}  // namespace nestband
