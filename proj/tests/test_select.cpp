#include "doctest.h"
#include "helpers.hpp"

#include "nestband/error.hpp"
#include "nestband/select.hpp"
#include "nestband/simulate.hpp"

#include <algorithm>
#include <cmath>

using namespace nestband;

TEST_CASE("default grids") {
  TuningGrid lasso = default_grid("lasso", 30, 100);
  REQUIRE(lasso.candidates.size() == 10);
  CHECK(lasso.candidates.front().penalty.lambda == doctest::Approx(1e-3));
  CHECK(lasso.candidates.back().penalty.lambda == doctest::Approx(1e2));
  CHECK(lasso.candidates[1].penalty.lambda / lasso.candidates[0].penalty.lambda ==
        doctest::Approx(std::pow(1e5, 1.0 / 9)));

  TuningGrid j2 = default_grid("j2", 30, 100);
  REQUIRE(j2.candidates.size() == 30);
  CHECK(j2.candidates[0].penalty.lambda2 == doctest::Approx(1e-4));
  CHECK(j2.candidates[2].penalty.lambda2 == doctest::Approx(1e-2));

  CHECK(default_grid("banding", 30, 100).candidates.size() == 21);
  CHECK(default_grid("banding", 5, 100).candidates.size() == 5);
  CHECK(default_grid("banding", 30, 6).candidates.back().bandwidth == 4);
  CHECK(default_grid("sample", 30, 100).candidates.size() == 1);
  CHECK_THROWS_AS(default_grid("ridge", 3, 10), ParseError);
}

TEST_CASE("grid specs") {
  TuningGrid g = parse_grid("banding", "k=0..3", 10, 100);
  CHECK(g.candidates.size() == 4);
  g = parse_grid("banding", "k=0,2,50", 10, 100);
  CHECK(g.candidates.size() == 2);  // 50 exceeds p - 1
  g = parse_grid("j2", "lambda=0.1,1;lambda2=5", 10, 100);
  REQUIRE(g.candidates.size() == 2);
  CHECK(g.candidates[1].penalty.lambda2 == 5.0);
  g = parse_grid("j2", "lambda=2", 10, 100);
  CHECK(g.candidates[0].penalty.lambda2 == 2.0);
  g = parse_grid("j2", "lambda=2;ratio=0.5,3", 10, 100);
  CHECK(g.candidates[1].penalty.lambda2 == 6.0);
  g = parse_grid("lasso", "lambda=0.01..100/5", 10, 100);
  REQUIRE(g.candidates.size() == 5);
  CHECK(g.candidates[2].penalty.lambda == doctest::Approx(1.0));
  CHECK(parse_grid("lasso", "", 10, 100).candidates.size() == 10);

  CHECK_THROWS_AS(parse_grid("lasso", "lambda=-1", 10, 100), ParseError);
  CHECK_THROWS_AS(parse_grid("lasso", "alpha=1", 10, 100), ParseError);
  CHECK_THROWS_AS(parse_grid("lasso", "lambda", 10, 100), ParseError);
  CHECK_THROWS_AS(parse_grid("lasso", "lambda=abc", 10, 100), ParseError);
  CHECK_THROWS_AS(parse_grid("banding", "k=1.5", 10, 100), ParseError);
  CHECK_THROWS_AS(parse_grid("banding", "k=40", 10, 100), ParseError);
}

TEST_CASE("pick_best") {
  TuningGrid g = parse_grid("lasso", "lambda=1,2,3", 5, 50);
  CHECK(pick_best(g, {3.0, 1.0, 2.0}).best_index == 1);
  // ties go to the larger lambda
  CHECK(pick_best(g, {1.0, 1.0, 2.0}).best_index == 1);
  CHECK(pick_best(g, {std::nullopt, 5.0, std::nullopt}).best_index == 1);
  CHECK_THROWS_AS(pick_best(g, {std::nullopt, std::nullopt, std::nullopt}), DomainError);
  CHECK_THROWS_AS(pick_best(g, {1.0}), DomainError);

  TuningGrid b = parse_grid("banding", "k=0,1,2", 5, 50);
  CHECK(pick_best(b, {2.0, 1.0, 1.0}).best_index == 1);

  // positive scaling leaves the choice unchanged
  Rng rng({51, 0});
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<MaybeValue> s, scaled;
    const double c = 0.01 + 10 * rng.uniform();
    for (int i = 0; i < 3; ++i) {
      const double v = rng.normal();
      s.push_back(v);
      scaled.push_back(c * v);
    }
    CHECK(pick_best(g, s).best_index == pick_best(g, scaled).best_index);
  }
}

TEST_CASE("validation score is the held-out likelihood") {
  CovModel m = make_sigma1(4);
  Dataset train = center(sample_gaussian(m, 40, {52, 0}));
  Dataset valid = shift_by(sample_gaussian(m, 30, {52, 1}), train.column_means);
  Estimate e = fit_estimator(train, EstimatorChoice::ledoit_wolf(), FitOptions{});
  const Matrix& s = e.covariance;
  double direct = 30 * std::log(s.determinant());
  const Matrix inv = s.inverse();
  for (Index i = 0; i < 30; ++i) direct += valid.values.row(i) * inv * valid.values.row(i).transpose();
  CHECK(*validation_score(e, valid) == doctest::Approx(direct).epsilon(1e-10));

  Estimate b = fit_estimator(train, EstimatorChoice::banding(1), FitOptions{});
  CHECK(*validation_score(b, valid) == doctest::Approx(neg_log_likelihood(*b.factors, valid)));
}

TEST_CASE("validation selection") {
  CovModel m = make_sigma1(5);
  SUBCASE("singleton grid") {
    Dataset train = center(sample_gaussian(m, 20, {53, 0}));
    Dataset valid = shift_by(sample_gaussian(m, 20, {53, 1}), train.column_means);
    Selection s = select_on_validation(train, valid, parse_grid("banding", "k=2", 5, 20), FitOptions{});
    CHECK(s.best.bandwidth == 2);
  }
  SUBCASE("lag-one truth selects k = 1") {
    Dataset train = center(sample_gaussian(m, 2000, {54, 0}));
    Dataset valid = shift_by(sample_gaussian(m, 2000, {54, 1}), train.column_means);
    Estimate fit;
    Selection s = select_on_validation(train, valid, parse_grid("banding", "k=0,1", 5, 2000), FitOptions{}, &fit);
    CHECK(s.best.bandwidth == 1);
    CHECK(s.scores.size() == 2);
    CHECK(*s.scores[1] < *s.scores[0]);
    CHECK(fit.factors->row(4)(3) != 0.0);
  }
  SUBCASE("sample covariance is excluded when p > n") {
    CovModel wide = make_sigma1(10);
    Dataset train = center(sample_gaussian(wide, 6, {55, 0}));
    Dataset valid = shift_by(sample_gaussian(wide, 6, {55, 1}), train.column_means);
    CHECK_THROWS_AS(select_on_validation(train, valid, default_grid("sample", 10, 6), FitOptions{}), DomainError);
  }
  SUBCASE("adding candidates never worsens the best score") {
    Dataset train = center(sample_gaussian(m, 50, {56, 0}));
    Dataset valid = shift_by(sample_gaussian(m, 50, {56, 1}), train.column_means);
    Selection a = select_on_validation(train, valid, parse_grid("lasso", "lambda=1,10", 5, 50), FitOptions{});
    Selection b = select_on_validation(train, valid, parse_grid("lasso", "lambda=1,10,0.1,100", 5, 50), FitOptions{});
    CHECK(*b.scores[b.best_index] <= *a.scores[a.best_index]);
  }
}

TEST_CASE("fold assignment") {
  std::vector<int> f = fold_assignment(23, 5, {57, 0});
  std::vector<int> count(5, 0);
  for (int x : f) ++count[static_cast<std::size_t>(x)];
  CHECK(count == std::vector<int>{5, 5, 5, 4, 4});
  CHECK(f == fold_assignment(23, 5, {57, 0}));
  CHECK(f != fold_assignment(23, 5, {58, 0}));

  std::vector<int> loo = fold_assignment(7, 7, {1, 0});
  std::sort(loo.begin(), loo.end());
  for (int i = 0; i < 7; ++i) CHECK(loo[static_cast<std::size_t>(i)] == i);

  CHECK_THROWS_AS(fold_assignment(10, 1, {}), DomainError);
  CHECK_THROWS_AS(fold_assignment(3, 4, {}), DomainError);
}

TEST_CASE("k-fold selection") {
  CovModel m = make_sigma1(5);
  TuningGrid grid = parse_grid("banding", "k=0..3", 5, 200);
  SUBCASE("deterministic") {
    Dataset d = center(sample_gaussian(m, 60, {59, 0}));
    Selection a = select_kfold(d, grid, 5, FitOptions{}, {3, 0});
    Selection b = select_kfold(d, grid, 5, FitOptions{}, {3, 0});
    CHECK(a.best_index == b.best_index);
    CHECK(a.scores == b.scores);
  }
  SUBCASE("leave-one-out runs") {
    Dataset d = center(sample_gaussian(m, 12, {60, 0}));
    CHECK_NOTHROW(select_kfold(d, parse_grid("banding", "k=0,1", 5, 12), 12, FitOptions{}, {1, 0}));
  }
  SUBCASE("lag-one truth selects k = 1 in most trials") {
    int hits = 0;
    for (int trial = 0; trial < 50; ++trial) {
      Dataset d = center(sample_gaussian(m, 200, {61, static_cast<std::uint64_t>(trial)}));
      if (select_kfold(d, grid, 5, FitOptions{}, {62, static_cast<std::uint64_t>(trial)}).best.bandwidth == 1) ++hits;
    }
    MESSAGE("k = 1 selected in " << hits << " of 50 trials");
    CHECK(hits >= 40);
  }
}
