#include "nestband/estimate.hpp"

#include "nestband/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace nestband {

namespace {

// Row j's view of the Gram matrix of centered data: regress column j on the
// columns 0..j-1.
struct RowProblem {
  Index j;
  double n;
  Matrix zz;  // G[0:j, 0:j]
  Vector zy;  // G[0:j, j]
  const Dataset& data;
  double floor;

  RowProblem(const Matrix& gram, Index row, const Dataset& d)
      : j(row),
        n(static_cast<double>(d.n())),
        zz(gram.topLeftCorner(row, row)),
        zy(gram.col(row).head(row)),
        data(d),
        floor(variance_floor(d, row)) {}

  // From the residuals; the Gram expansion cancels badly near the OLS fit.
  double rss(const Vector& phi) const {
    return (data.values.col(j) - data.values.leftCols(j) * phi).squaredNorm();
  }

  // Closed-form Step 1.
  double sigma2(const Vector& phi, bool* degenerate = nullptr) const {
    const double s = rss(phi) / n;
    if (s < floor) {
      if (degenerate) *degenerate = true;
      return floor;
    }
    return s;
  }

  double objective(const Vector& phi, double s2, const PenaltySpec& spec,
                   const MarginalCoefs* marginals) const {
    const double pen = eval_penalty(spec, phi, marginals);
    if (std::isinf(pen)) return kInfinity;
    return n * std::log(s2) + rss(phi) / s2 + pen;
  }
};

Matrix gram_of(const Dataset& data) {
  Matrix g = Matrix::Zero(data.p(), data.p());
  g.selfadjointView<Eigen::Lower>().rankUpdate(data.values.transpose());
  return g.selfadjointView<Eigen::Lower>();
}

void threshold_small(Vector& phi, double cutoff) {
  for (Index t = 0; t < phi.size(); ++t) {
    if (std::abs(phi(t)) <= cutoff) phi(t) = 0.0;
  }
}

Vector lqa_step(const RowProblem& row, const Vector& phi_prev, double sigma2,
                const PenaltySpec& spec, const MarginalCoefs* marginals, FitFlags* flags) {
  const Vector w = lqa_weights(spec, phi_prev, marginals);
  std::vector<Index> active;
  for (Index t = 0; t < w.size(); ++t) {
    if (std::isfinite(w(t))) active.push_back(t);
  }
  Vector out = Vector::Zero(row.j);
  const Index m = static_cast<Index>(active.size());
  if (m == 0) return out;

  // (Z'Z + sigma2 W) phi = Z'y on the active set.
  Matrix a(m, m);
  Vector rhs(m);
  for (Index r = 0; r < m; ++r) {
    rhs(r) = row.zy(active[r]);
    for (Index c = 0; c < m; ++c) a(r, c) = row.zz(active[r], active[c]);
    a(r, r) += sigma2 * w(active[r]);
  }
  Eigen::LLT<Matrix> llt(a);
  Vector sol;
  if (llt.info() == Eigen::Success) {
    sol = llt.solve(rhs);
  } else {
    const double jitter = 1e-12 * a.trace() / static_cast<double>(m);
    a.diagonal().array() += jitter > 0.0 ? jitter : 1e-12;
    if (flags) ++flags->jittered_solves;
    Eigen::LDLT<Matrix> ldlt(a);
    sol = ldlt.solve(rhs);
  }
  for (Index r = 0; r < m; ++r) out(active[r]) = sol(r);
  return out;
}

// Unique positive root of a3 v^3 + a2 v^2 + a0 = 0 with a3 > 0, a0 < 0.
double positive_cubic_root(double a3, double a2, double a0) {
  const double b = a2 / a3;
  const double d = a0 / a3;
  const double p = -b * b / 3.0;
  const double q = 2.0 * b * b * b / 27.0 + d;
  const double disc = q * q / 4.0 + p * p * p / 27.0;
  double y;
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    y = std::cbrt(-q / 2.0 + s) + std::cbrt(-q / 2.0 - s);
  } else {
    const double r = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (2.0 * p) * std::sqrt(-3.0 / p), -1.0, 1.0);
    y = r * std::cos(std::acos(arg) / 3.0);
  }
  double v = y - b / 3.0;

  auto f = [&](double x) { return ((a3 * x + a2) * x) * x + a0; };
  auto df = [&](double x) { return (3.0 * a3 * x + 2.0 * a2) * x; };
  for (int it = 0; it < 4 && v > 0.0; ++it) {
    const double slope = df(v);
    if (!(slope > 0.0)) break;
    const double next = v - f(v) / slope;
    if (!(next > 0.0)) break;
    v = next;
  }
  if (v > 0.0 && std::abs(f(v)) <= 1e-9 * (std::abs(a0) + a3 * v * v * v + std::abs(a2) * v * v)) {
    return v;
  }
  // Bisection fallback; f(0) < 0 and f grows without bound.
  double lo = 0.0, hi = 1.0;
  while (f(hi) < 0.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// argmin_u  a u^2 - 2 b u + alpha |u| + c / |u|, c >= 0 (c/|u| := 0 at c = 0).
double minimize_coordinate(double a, double b, double alpha, double c, double current) {
  if (c == 0.0) {
    if (!(a > 0.0)) return 0.0;
    const double shrunk = std::max(std::abs(b) - alpha / 2.0, 0.0);
    return std::copysign(shrunk, b) / a;
  }
  // u must be nonzero. On each half-line minimize a v^2 - beta v + c / v.
  auto side = [&](double beta, double* value) {
    double v;
    if (a > 0.0) {
      v = positive_cubic_root(2.0 * a, -beta, -c);
    } else if (beta < 0.0) {
      v = std::sqrt(c / -beta);
    } else {
      *value = kInfinity;
      return 0.0;
    }
    *value = a * v * v - beta * v + c / v;
    return v;
  };
  double pos_val = 0.0, neg_val = 0.0;
  const double vp = side(2.0 * b - alpha, &pos_val);
  const double vn = side(-2.0 * b - alpha, &neg_val);
  if (std::isinf(pos_val) && std::isinf(neg_val)) return current;
  return pos_val <= neg_val ? vp : -vn;
}

Vector shooting_sweep(const RowProblem& row, const Vector& phi_prev, double sigma2,
                      const PenaltySpec& spec, const MarginalCoefs* marginals) {
  Vector phi = phi_prev;
  const Index m = row.j;
  if (m == 0) return phi;
  const double scale = leading_scale(spec, m, marginals);
  const bool has_ratio = (spec.kind == PenaltyKind::NestedJ2) ? spec.lambda2 > 0.0
                                                               : spec.nested() && spec.lambda > 0.0;
  const double ratio_lambda = spec.kind == PenaltyKind::NestedJ2 ? spec.lambda2 : spec.lambda;
  for (Index t = 0; t < m; ++t) {
    const bool nearest = (t == m - 1);
    // Penalty terms touching phi_t: alpha |u| + c / |u|, or forced zero when
    // the next-nearer coefficient is zero.
    double alpha = 0.0;
    double c = 0.0;
    bool forced_zero = false;
    switch (spec.kind) {
      case PenaltyKind::Lasso:
        alpha = spec.lambda;
        break;
      case PenaltyKind::NestedJ0:
      case PenaltyKind::NestedJ1:
        if (nearest) alpha = spec.lambda / scale;
        break;
      case PenaltyKind::NestedJ2:
        alpha = spec.lambda;
        break;
    }
    if (has_ratio) {
      if (!nearest) {
        const double next = std::abs(phi(t + 1));
        if (next == 0.0) {
          forced_zero = true;
        } else {
          alpha += ratio_lambda / next;
        }
      }
      if (t > 0) c = ratio_lambda * std::abs(phi(t - 1));
    }
    if (forced_zero) {
      phi(t) = 0.0;
      continue;
    }
    const double b = row.zy(t) - row.zz.row(t).dot(phi) + row.zz(t, t) * phi(t);
    phi(t) = minimize_coordinate(row.zz(t, t), b, sigma2 * alpha, sigma2 * c, phi(t));
  }
  return phi;
}

Vector ols_row(const Dataset& data, Index j, Index first, FitFlags* flags) {
  const Index k = j - first;
  Vector phi = Vector::Zero(j);
  if (k == 0) return phi;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(data.values.middleCols(first, k));
  if (cod.rank() < k && flags) flags->rank_deficient = true;
  phi.tail(k) = cod.solve(data.values.col(j));
  return phi;
}

CholeskyFactors fit_penalized(const Dataset& data, const PenaltySpec& spec, const FitOptions& opts,
                              FitFlags* flags, const char* who) {
  require_centered(data, who);
  spec.validate();
  opts.validate();
  const Index p = data.p();
  const Matrix gram = gram_of(data);
  std::optional<MarginalCoefs> marginals;
  if (spec.kind == PenaltyKind::NestedJ1 || p >= data.n()) marginals = marginal_coefficients(data);
  const MarginalCoefs* marg = marginals ? &*marginals : nullptr;
  const bool use_ols_start = p < data.n();

  CholeskyFactors factors = CholeskyFactors::diagonal(Vector::Ones(p));
  for (Index j = 0; j < p; ++j) {
    const RowProblem row(gram, j, data);
    Vector phi;
    if (j == 0) {
      phi = Vector::Zero(0);
    } else {
      phi = use_ols_start ? ols_row(data, j, 0, flags)
                          : Vector(marg->coef.row(j).head(j).transpose());
      if (opts.solver == Solver::Lqa) threshold_small(phi, opts.stability_floor);
      leading_scale(spec, j, marg);  // rejects a zero J1 marginal up front

      double s2 = row.sigma2(phi);
      double obj = row.objective(phi, s2, spec, marg);
      int it = 0;
      bool converged = false;
      while (it < opts.max_iters) {
        ++it;
        Vector next;
        if (opts.solver == Solver::Lqa) {
          next = lqa_step(row, phi, s2, spec, marg, flags);
          threshold_small(next, opts.stability_floor);
        } else {
          next = shooting_sweep(row, phi, s2, spec, marg);
        }
        const double s2_next = row.sigma2(next);
        const double obj_next = row.objective(next, s2_next, spec, marg);
        if (opts.solver == Solver::Shooting && std::isfinite(obj) &&
            obj_next > obj + 1e-9 * std::max(1.0, std::abs(obj))) {
          throw InternalError("shooting increased the objective of row " + std::to_string(j));
        }
        phi = std::move(next);
        s2 = s2_next;
        const bool done = std::isfinite(obj) && std::isfinite(obj_next) &&
                          std::abs(obj - obj_next) <= opts.rel_tol * std::max(1.0, std::abs(obj));
        obj = obj_next;
        if (done) {
          converged = true;
          break;
        }
      }
      if (flags) {
        flags->iterations = std::max(flags->iterations, it);
        if (!converged) ++flags->unconverged_rows;
      }
      threshold_small(phi, opts.zero_threshold);
      if (spec.nested()) enforce_contiguity(phi);
    }
    const RowFit fit = update_sigma(j, phi, data);
    if (fit.degenerate && flags) ++flags->degenerate_rows;
    factors.set_row(j, phi);
    factors.set_variance(j, fit.sigma2);
  }
  return factors;
}

}  // namespace

void FitOptions::validate() const {
  if (max_iters < 1) throw DomainError("max_iters must be positive");
  if (!(rel_tol > 0.0)) throw DomainError("rel_tol must be positive");
  if (!(zero_threshold >= 0.0) || !(stability_floor >= 0.0)) {
    throw DomainError("thresholds must be nonnegative");
  }
}

std::string EstimatorChoice::family() const {
  switch (method) {
    case Method::Sample: return "sample";
    case Method::LedoitWolf: return "ledoit-wolf";
    case Method::Banding: return "banding";
    case Method::Lasso: return "lasso";
    case Method::Adaptive:
      switch (penalty.kind) {
        case PenaltyKind::NestedJ0: return "j0";
        case PenaltyKind::NestedJ1: return "j1";
        case PenaltyKind::NestedJ2: return "j2";
        case PenaltyKind::Lasso: return "lasso";
      }
  }
  return "unknown";
}

std::string EstimatorChoice::parameters() const {
  char buf[96];
  switch (method) {
    case Method::Sample:
    case Method::LedoitWolf:
      return "";
    case Method::Banding:
      std::snprintf(buf, sizeof buf, "k=%lld", static_cast<long long>(bandwidth));
      return buf;
    case Method::Lasso:
      std::snprintf(buf, sizeof buf, "lambda=%.6g", penalty.lambda);
      return buf;
    case Method::Adaptive:
      if (penalty.kind == PenaltyKind::NestedJ2) {
        std::snprintf(buf, sizeof buf, "lambda=%.6g;lambda2=%.6g", penalty.lambda, penalty.lambda2);
      } else {
        std::snprintf(buf, sizeof buf, "lambda=%.6g", penalty.lambda);
      }
      return buf;
  }
  return "";
}

std::optional<Eigen::LLT<Matrix>> spd_factor(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) return std::nullopt;
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const Vector diag = Matrix(llt.matrixL()).diagonal();
  const double lo = diag.minCoeff();
  const double hi = diag.maxCoeff();
  if (!(lo > 0.0)) return std::nullopt;
  const double rcond = (lo / hi) * (lo / hi);
  if (rcond <= static_cast<double>(m.rows()) * std::numeric_limits<double>::epsilon()) {
    return std::nullopt;
  }
  return llt;
}

Matrix sample_covariance(const Dataset& data) {
  const Dataset c = data.centered ? data : center(data);
  Matrix s = Matrix::Zero(c.p(), c.p());
  s.selfadjointView<Eigen::Lower>().rankUpdate(c.values.transpose(), 1.0 / static_cast<double>(c.n()));
  return s.selfadjointView<Eigen::Lower>();
}

Matrix fit_ledoit_wolf(const Dataset& data, bool* degenerate) {
  const Dataset c = data.centered ? data : center(data);
  const Index p = c.p();
  const double n = static_cast<double>(c.n());
  const Matrix s = sample_covariance(c);
  const double m = s.trace() / static_cast<double>(p);
  if (degenerate) *degenerate = !(m > 0.0);
  if (!(m > 0.0)) return Matrix::Zero(p, p);
  const double d2 = (s - m * Matrix::Identity(p, p)).squaredNorm() / static_cast<double>(p);
  if (d2 == 0.0) return s;
  // ||x x' - S||_F^2 = (x'x)^2 - 2 x'Sx + ||S||_F^2
  const double s_norm2 = s.squaredNorm();
  double bbar2 = 0.0;
  for (Index i = 0; i < c.n(); ++i) {
    const Vector x = c.values.row(i).transpose();
    const double xx = x.squaredNorm();
    bbar2 += xx * xx - 2.0 * x.dot(s * x) + s_norm2;
  }
  bbar2 /= n * n * static_cast<double>(p);
  const double b2 = std::min(bbar2, d2);
  const double a2 = d2 - b2;
  Matrix out = (a2 / d2) * s;
  out.diagonal().array() += (b2 / d2) * m;
  return 0.5 * (out + out.transpose());
}

MarginalCoefs marginal_coefficients(const Dataset& data) {
  const Index p = data.p();
  const Matrix g = gram_of(data);
  MarginalCoefs m;
  m.coef = Matrix::Zero(p, p);
  for (Index t = 0; t + 1 < p; ++t) {
    if (!(g(t, t) > 0.0)) {
      throw DomainError("column " + std::to_string(t) + " has zero mean square");
    }
    for (Index j = t + 1; j < p; ++j) m.coef(j, t) = g(t, j) / g(t, t);
  }
  return m;
}

CholeskyFactors fit_adaptive_banding(const Dataset& data, const PenaltySpec& spec,
                                     const FitOptions& opts, FitFlags* flags) {
  if (!spec.nested()) throw DomainError("adaptive banding needs a nested penalty (J0, J1, J2)");
  return fit_penalized(data, spec, opts, flags, "fit_adaptive_banding");
}

CholeskyFactors fit_lasso_cholesky(const Dataset& data, double lambda, const FitOptions& opts,
                                   FitFlags* flags) {
  return fit_penalized(data, PenaltySpec{PenaltyKind::Lasso, lambda, 0.0}, opts, flags,
                       "fit_lasso_cholesky");
}

CholeskyFactors fit_banding(const Dataset& data, Index k, FitFlags* flags) {
  require_centered(data, "fit_banding");
  const Index p = data.p();
  if (k < 0 || k > std::min(p - 1, data.n() - 2)) {
    throw DomainError("bandwidth " + std::to_string(k) + " outside [0, min(p-1, n-2)]");
  }
  CholeskyFactors factors = CholeskyFactors::diagonal(Vector::Ones(p));
  for (Index j = 0; j < p; ++j) {
    const Vector phi = ols_row(data, j, j - std::min(k, j), flags);
    const RowFit fit = update_sigma(j, phi, data);
    if (fit.degenerate && flags) ++flags->degenerate_rows;
    factors.set_row(j, phi);
    factors.set_variance(j, fit.sigma2);
  }
  return factors;
}

CholeskyFactors fit_ols_cholesky(const Dataset& data, FitFlags* flags) {
  require_centered(data, "fit_ols_cholesky");
  const Index p = data.p();
  CholeskyFactors factors = CholeskyFactors::diagonal(Vector::Ones(p));
  for (Index j = 0; j < p; ++j) {
    const Vector phi = ols_row(data, j, 0, flags);
    const RowFit fit = update_sigma(j, phi, data);
    if (fit.degenerate && flags) ++flags->degenerate_rows;
    factors.set_row(j, phi);
    factors.set_variance(j, fit.sigma2);
  }
  return factors;
}

Vector lqa_row_update(Index j, const Vector& phi_prev, double sigma2, const Dataset& data,
                      const PenaltySpec& spec, const MarginalCoefs* marginals, FitFlags* flags) {
  if (!(sigma2 > 0.0)) throw DomainError("sigma2 must be positive");
  if (phi_prev.size() != j) throw DomainError("row length must equal row index");
  return lqa_step(RowProblem(gram_of(data), j, data), phi_prev, sigma2, spec, marginals, flags);
}

Vector shooting_row_update(Index j, const Vector& phi_prev, double sigma2, const Dataset& data,
                           const PenaltySpec& spec, const MarginalCoefs* marginals) {
  if (!(sigma2 > 0.0)) throw DomainError("sigma2 must be positive");
  if (phi_prev.size() != j) throw DomainError("row length must equal row index");
  return shooting_sweep(RowProblem(gram_of(data), j, data), phi_prev, sigma2, spec, marginals);
}

double penalized_row_objective(Index j, const Vector& phi, double sigma2, const Dataset& data,
                               const PenaltySpec& spec, const MarginalCoefs* marginals) {
  const double pen = eval_penalty(spec, phi, marginals);
  if (std::isinf(pen)) return kInfinity;
  return row_neg_log_likelihood(j, phi, sigma2, data) + pen;
}

Estimate fit_estimator(const Dataset& data, const EstimatorChoice& choice, const FitOptions& opts) {
  require_centered(data, "fit_estimator");
  Estimate est;
  auto from_covariance = [&](Matrix cov) {
    est.covariance = std::move(cov);
    if (auto llt = spd_factor(est.covariance)) {
      est.precision = llt->solve(Matrix::Identity(data.p(), data.p()));
      est.precision = 0.5 * (est.precision + est.precision.transpose());
    } else {
      est.singular = true;
    }
  };
  auto from_factors = [&](CholeskyFactors f) {
    est.precision = reconstruct_precision(f);
    est.covariance = reconstruct_covariance(f);
    est.factors = std::move(f);
  };
  switch (choice.method) {
    case Method::Sample:
      from_covariance(sample_covariance(data));
      break;
    case Method::LedoitWolf:
      from_covariance(fit_ledoit_wolf(data));
      break;
    case Method::Banding:
      from_factors(fit_banding(data, choice.bandwidth, &est.flags));
      break;
    case Method::Lasso:
      from_factors(fit_lasso_cholesky(data, choice.penalty.lambda, opts, &est.flags));
      break;
    case Method::Adaptive:
      from_factors(fit_adaptive_banding(data, choice.penalty, opts, &est.flags));
      break;
  }
  return est;
}

}  // namespace nestband
