#include "nestband/penalty.hpp"

#include "nestband/error.hpp"

#include <cmath>
#include <string>

namespace nestband {

namespace {

// |a| / |b| with 0/0 = 0 and x/0 = inf.
double ratio(double a, double b) {
  a = std::abs(a);
  b = std::abs(b);
  if (a == 0.0) return 0.0;
  if (b == 0.0) return kInfinity;
  return a / b;
}

double ratio_chain(const Vector& phi) {
  double sum = 0.0;
  for (Index t = 0; t + 1 < phi.size(); ++t) sum += ratio(phi(t), phi(t + 1));
  return sum;
}

}  // namespace

void PenaltySpec::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw DomainError("penalty lambda must be finite and nonnegative");
  }
  if (!(lambda2 >= 0.0) || !std::isfinite(lambda2)) {
    throw DomainError("penalty lambda2 must be finite and nonnegative");
  }
}

double leading_scale(const PenaltySpec& spec, Index j, const MarginalCoefs* marginals) {
  if (spec.kind != PenaltyKind::NestedJ1 || j == 0) return 1.0;
  if (marginals == nullptr) throw DomainError("J1 penalty requires marginal coefficients");
  const double m = std::abs(marginals->leading(j));
  if (m == 0.0) {
    throw DomainError("J1 penalty undefined for row " + std::to_string(j) +
                      ": marginal coefficient on the nearest predecessor is zero");
  }
  return m;
}

double eval_penalty(const PenaltySpec& spec, const Vector& phi, const MarginalCoefs* marginals) {
  spec.validate();
  const Index j = phi.size();
  if (j == 0) return 0.0;
  switch (spec.kind) {
    case PenaltyKind::Lasso:
      return spec.lambda * phi.cwiseAbs().sum();
    case PenaltyKind::NestedJ0:
    case PenaltyKind::NestedJ1: {
      const double scale = leading_scale(spec, j, marginals);
      if (spec.lambda == 0.0) return 0.0;
      return spec.lambda * (std::abs(phi(j - 1)) / scale + ratio_chain(phi));
    }
    case PenaltyKind::NestedJ2: {
      double value = spec.lambda * phi.cwiseAbs().sum();
      if (spec.lambda2 > 0.0) value += spec.lambda2 * ratio_chain(phi);
      return value;
    }
  }
  return 0.0;
}

Vector lqa_weights(const PenaltySpec& spec, const Vector& phi_prev,
                   const MarginalCoefs* marginals) {
  spec.validate();
  const Index j = phi_prev.size();
  Vector w = Vector::Zero(j);
  if (j == 0) return w;
  const double scale = leading_scale(spec, j, marginals);
  // lambda |a| / |b|  ~  lambda a^2 / (2 |a_prev| |b_prev|)
  auto ratio_weight = [&](Index t, double lambda) {
    if (lambda == 0.0) return 0.0;
    const double b = std::abs(phi_prev(t + 1));
    if (b == 0.0) return kInfinity;
    return lambda / (2.0 * std::abs(phi_prev(t)) * b);
  };
  for (Index t = 0; t < j; ++t) {
    if (phi_prev(t) == 0.0) {
      w(t) = kInfinity;
      continue;
    }
    const double a = std::abs(phi_prev(t));
    const bool nearest = (t == j - 1);
    switch (spec.kind) {
      case PenaltyKind::Lasso:
        w(t) = spec.lambda / (2.0 * a);
        break;
      case PenaltyKind::NestedJ0:
      case PenaltyKind::NestedJ1:
        w(t) = nearest ? spec.lambda / (2.0 * a * scale) : ratio_weight(t, spec.lambda);
        break;
      case PenaltyKind::NestedJ2:
        w(t) = spec.lambda / (2.0 * a) + (nearest ? 0.0 : ratio_weight(t, spec.lambda2));
        break;
    }
  }
  return w;
}

Index band_support(const Vector& phi, double zero_tol) {
  Index k = 0;
  for (Index t = phi.size() - 1; t >= 0; --t) {
    if (std::abs(phi(t)) <= zero_tol) break;
    ++k;
  }
  return k;
}

void enforce_contiguity(Vector& phi, double zero_tol) {
  const Index k = band_support(phi, zero_tol);
  phi.head(phi.size() - k).setZero();
}

std::vector<Index> bandwidths(const CholeskyFactors& factors, double zero_tol) {
  std::vector<Index> k(static_cast<std::size_t>(factors.p()));
  for (Index j = 0; j < factors.p(); ++j) {
    k[static_cast<std::size_t>(j)] = band_support(factors.row(j), zero_tol);
  }
  return k;
}

}  // namespace nestband
