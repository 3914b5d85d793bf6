#include "doctest.h"
#include "helpers.hpp"

#include "nestband/error.hpp"
#include "nestband/penalty.hpp"

#include <cmath>

using namespace nestband;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

MarginalCoefs marginals_with_leading(Index j, double value) {
  MarginalCoefs m;
  m.coef = Matrix::Zero(j + 1, j + 1);
  m.coef(j, j - 1) = value;
  return m;
}

}  // namespace

TEST_CASE("penalty of a zero row is zero") {
  auto m = marginals_with_leading(3, 0.5);
  for (auto kind : {PenaltyKind::Lasso, PenaltyKind::NestedJ0, PenaltyKind::NestedJ1, PenaltyKind::NestedJ2}) {
    CHECK(eval_penalty({kind, 2.0, 3.0}, Vector::Zero(3), &m) == 0.0);
    CHECK(eval_penalty({kind, 2.0, 3.0}, Vector(), &m) == 0.0);
  }
}

TEST_CASE("hand-evaluated penalties") {
  CHECK(eval_penalty({PenaltyKind::NestedJ0, 1.0, 0.0}, vec({0, 0.25, 0.5})) == doctest::Approx(1.0));
  CHECK(eval_penalty({PenaltyKind::NestedJ0, 1.0, 0.0}, vec({0.1, 0, 0.5})) == kInfinity);
  CHECK(eval_penalty({PenaltyKind::NestedJ2, 1.0, 2.0}, vec({0.2, 0.4})) == doctest::Approx(1.6));
  CHECK(eval_penalty({PenaltyKind::Lasso, 2.0, 0.0}, vec({-0.5, 0.25})) == doctest::Approx(1.5));

  // J1: leading term over |marginal| = 0.25
  auto m = marginals_with_leading(2, -0.25);
  CHECK(eval_penalty({PenaltyKind::NestedJ1, 1.0, 0.0}, vec({0.1, 0.5}), &m) == doctest::Approx(2.0 + 0.2));
}

TEST_CASE("J1 needs a nonzero marginal") {
  auto m = marginals_with_leading(2, 0.0);
  CHECK_THROWS_AS(eval_penalty({PenaltyKind::NestedJ1, 1.0, 0.0}, vec({0.1, 0.5}), &m), DomainError);
  CHECK_THROWS_AS(eval_penalty({PenaltyKind::NestedJ1, 1.0, 0.0}, vec({0.1, 0.5}), nullptr), DomainError);
  CHECK_THROWS_AS(lqa_weights({PenaltyKind::NestedJ1, 1.0, 0.0}, vec({0.1, 0.5}), &m), DomainError);
}

TEST_CASE("negative tuning values are rejected") {
  CHECK_THROWS_AS(eval_penalty({PenaltyKind::Lasso, -1.0, 0.0}, vec({1})), DomainError);
  CHECK_THROWS_AS(eval_penalty({PenaltyKind::NestedJ2, 1.0, -1.0}, vec({1})), DomainError);
  CHECK_THROWS_AS(eval_penalty({PenaltyKind::Lasso, kInfinity, 0.0}, vec({1})), DomainError);
}

TEST_CASE("LQA weights") {
  Vector w = lqa_weights({PenaltyKind::Lasso, 1.0, 0.0}, vec({0.5}));
  CHECK(w(0) == doctest::Approx(1.0));

  Vector phi = vec({0.3, -0.7, 0.2});
  Vector lasso = lqa_weights({PenaltyKind::Lasso, 1.5, 0.0}, phi);
  Vector j2 = lqa_weights({PenaltyKind::NestedJ2, 1.5, 0.0}, phi);
  CHECK(lasso.isApprox(j2));

  Vector frozen = lqa_weights({PenaltyKind::NestedJ0, 1.0, 0.0}, vec({0.0, 0.4}));
  CHECK(frozen(0) == kInfinity);
  CHECK(frozen(1) == doctest::Approx(1.0 / 0.8));

  // J2 with both terms: t = 0 gets lambda1/(2|a|) + lambda2/(2|a||b|)
  Vector both = lqa_weights({PenaltyKind::NestedJ2, 1.0, 2.0}, vec({0.2, 0.4}));
  CHECK(both(0) == doctest::Approx(1.0 / 0.4 + 2.0 / (2 * 0.2 * 0.4)));
  CHECK(both(1) == doctest::Approx(1.0 / 0.8));

  auto m = marginals_with_leading(2, 0.5);
  Vector j1 = lqa_weights({PenaltyKind::NestedJ1, 1.0, 0.0}, vec({0.2, 0.4}), &m);
  CHECK(j1(1) == doctest::Approx(1.0 / (2 * 0.4 * 0.5)));
}

TEST_CASE("LQA surrogate majorizes the absolute value") {
  Rng rng({21, 0});
  for (int rep = 0; rep < 200; ++rep) {
    const double a = rng.normal();
    const double x = 3.0 * rng.normal();
    const double lambda = rng.uniform() * 5.0;
    Vector w = lqa_weights({PenaltyKind::Lasso, lambda, 0.0}, Vector::Constant(1, a));
    const double surrogate = w(0) * x * x + lambda * std::abs(a) / 2.0;
    CHECK(surrogate >= lambda * std::abs(x) - 1e-12);
    CHECK(w(0) * a * a + lambda * std::abs(a) / 2.0 == doctest::Approx(lambda * std::abs(a)));
  }
}

TEST_CASE("band support") {
  CHECK(band_support(vec({0, 0, 0.3, 0.8})) == 2);
  CHECK(band_support(Vector::Zero(4)) == 0);
  CHECK(band_support(Vector()) == 0);
  CHECK(band_support(vec({0.2, 0, 0.3})) == 1);
  CHECK(band_support(vec({0.2, 1e-12, 0.3}), 1e-10) == 1);

  Vector phi = vec({0.2, 0, 0.3});
  enforce_contiguity(phi);
  CHECK(phi == vec({0, 0, 0.3}));

  Matrix coef = Matrix::Zero(3, 3);
  coef(2, 1) = 0.5;
  coef(1, 0) = 0.5;
  auto k = bandwidths(CholeskyFactors(coef, Vector::Ones(3)));
  CHECK(k == std::vector<Index>{0, 1, 1});
}

TEST_CASE("homogeneity of single-parameter nested penalties") {
  Rng rng({22, 0});
  auto m = marginals_with_leading(4, 0.7);
  for (int rep = 0; rep < 50; ++rep) {
    Vector phi(4);
    for (Index t = 0; t < 4; ++t) phi(t) = rng.uniform() < 0.3 ? 0.0 : rng.normal();
    const double c = 0.1 + 4.0 * rng.uniform();
    for (auto kind : {PenaltyKind::NestedJ0, PenaltyKind::NestedJ1}) {
      const double base = eval_penalty({kind, 1.3, 0.0}, phi, &m);
      const double scaled = eval_penalty({kind, 1.3 * c, 0.0}, phi, &m);
      if (std::isinf(base)) {
        CHECK(std::isinf(scaled));
      } else {
        CHECK(scaled == doctest::Approx(c * base).epsilon(1e-12));
      }
    }
  }
}
