#pragma once

// Lasso and nested Lasso penalties on one row of the Cholesky factor, and
// their local quadratic (ridge) surrogates.
//
// A row phi has length j (zero-based row index); phi[j-1] multiplies the
// nearest predecessor. The nested penalties charge |phi[t]| / |phi[t+1]| for
// each farther coefficient, with 0/0 = 0 and x/0 = +inf for x != 0, so a zero
// coefficient forces every farther one to zero.

#include "nestband/cholcore.hpp"

#include <limits>
#include <vector>

namespace nestband {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class PenaltyKind { Lasso, NestedJ0, NestedJ1, NestedJ2 };

struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::Lasso;
  double lambda = 0.0;   // lambda, or lambda_1 for J2
  double lambda2 = 0.0;  // J2 only

  bool nested() const { return kind != PenaltyKind::Lasso; }
  void validate() const;
};

/// Coefficients of the single-predictor regressions of X_j on X_t, t < j.
struct MarginalCoefs {
  Matrix coef;  // coef(j, t) for t < j; zero elsewhere

  /// Coefficient of row j on its nearest predecessor j-1.
  double leading(Index j) const { return coef(j, j - 1); }
};

/// Penalty value for row `phi`; may be +inf. `marginals` is consulted only
/// for NestedJ1 and may be null otherwise.
double eval_penalty(const PenaltySpec& spec, const Vector& phi,
                    const MarginalCoefs* marginals = nullptr);

/// Ridge weights w such that sum_t w_t phi_t^2 majorizes the penalty around
/// `phi_prev`. An infinite weight means the coefficient is frozen at zero.
Vector lqa_weights(const PenaltySpec& spec, const Vector& phi_prev,
                   const MarginalCoefs* marginals = nullptr);

/// Number of trailing coefficients with |phi| > zero_tol, scanning from the
/// nearest predecessor until the first zero.
Index band_support(const Vector& phi, double zero_tol = 0.0);

/// Zeroes every coefficient with |phi| <= zero_tol and everything farther
/// than the nearest such zero, leaving a contiguous trailing support.
void enforce_contiguity(Vector& phi, double zero_tol = 0.0);

/// Per-row band_support of a factor.
std::vector<Index> bandwidths(const CholeskyFactors& factors, double zero_tol = 0.0);

/// Scale divisor applied to the leading coefficient in J1 (|phi*_{j,j-1}|),
/// 1 for the other kinds. Throws DomainError for a zero marginal.
double leading_scale(const PenaltySpec& spec, Index j, const MarginalCoefs* marginals);

}  // namespace nestband
