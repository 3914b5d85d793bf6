#include "doctest.h"
#include "helpers.hpp"

#include "nestband/error.hpp"
#include "nestband/estimate.hpp"
#include "nestband/penalty.hpp"
#include "nestband/simulate.hpp"

#include <cmath>

using namespace nestband;

TEST_CASE("splitmix64 reference value") {
  // first output of the reference generator seeded with 0
  CHECK(splitmix64(0) == 0xE220A8397B1DCDAFULL);
}

TEST_CASE("random streams") {
  Rng a({1, 0}), b({1, 0}), c({1, 1}), d({2, 0});
  const auto x = a.next_u64();
  CHECK(x == b.next_u64());
  CHECK(x != c.next_u64());
  CHECK(x != d.next_u64());

  Rng r({3, 0});
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sq / n - 1.0) < 0.01);

  for (int i = 0; i < 1000; ++i) {
    const auto k = r.uniform_int(1, 3);
    CHECK((k >= 1 && k <= 3));
    const double u = r.uniform();
    CHECK((u >= 0.0 && u < 1.0));
  }
  CHECK(r.uniform_int(5, 5) == 5);
  CHECK_THROWS_AS(r.uniform_int(2, 1), DomainError);
}

TEST_CASE("sigma1") {
  CovModel m = make_sigma1(3);
  CHECK(m.true_factors.row(1)(0) == 0.8);
  CHECK(m.true_factors.row(2)(0) == 0.0);
  CHECK(m.true_factors.row(2)(1) == 0.8);
  CHECK(m.true_factors.variances().isApprox(Vector::Constant(3, 0.01)));
  CHECK(m.true_band == std::vector<Index>{0, 1, 1});

  CovModel one = make_sigma1(1);
  CHECK(one.true_factors.variances()(0) == 0.01);
  CHECK(one.true_factors.phi().isZero());

  Matrix expected(2, 2);
  expected << 164, -80, -80, 100;
  CHECK((make_sigma1(2).omega - expected).cwiseAbs().maxCoeff() < 1e-9);
  CHECK_THROWS_AS(make_sigma1(0), DomainError);
}

TEST_CASE("sigma2") {
  CovModel m = make_sigma2(3);
  CHECK(m.true_factors.row(2)(0) == 0.25);
  CHECK(m.true_factors.row(2)(1) == 0.5);
  Matrix expected(2, 2);
  expected << 125, -50, -50, 100;
  CHECK((make_sigma2(2).omega - expected).cwiseAbs().maxCoeff() < 1e-9);

  CovModel six = make_sigma2(6);
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 6; ++j)
      if (std::abs(i - j) <= 2) CHECK(std::abs(six.omega(i, j)) > 0.0);
  CHECK(nbtest::rel_frobenius(six.sigma * six.omega, Matrix::Identity(6, 6)) < 1e-8);
}

TEST_CASE("sigma3 blocks") {
  CHECK(default_sigma3_blocks(30) == 1);
  CHECK(default_sigma3_blocks(100) == 3);
  CHECK(default_sigma3_blocks(200) == 6);
  CHECK(block_sizes(10, 3) == std::vector<Index>{4, 3, 3});
  CHECK(block_sizes(6, 6) == std::vector<Index>{1, 1, 1, 1, 1, 1});
  CHECK_THROWS_AS(make_sigma3(5, 6, {1, 0}), DomainError);
  CHECK_THROWS_AS(make_sigma3(5, 0, {1, 0}), DomainError);

  CovModel two = make_sigma3(2, 1, {9, 0});
  CHECK(two.true_factors.row(1)(0) == 0.5);

  CovModel m = make_sigma3(20, 3, {4, 0});
  const auto sizes = block_sizes(20, 3);
  // no coefficient reaches across a block boundary, so omega is block diagonal
  Index offset = 0;
  for (Index size : sizes) {
    CHECK(m.omega.block(offset, offset + size, size, 20 - offset - size).isZero(0.0));
    offset += size;
  }
}

TEST_CASE("sigma3 draws stay in range for both layouts") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CovModel start = make_sigma3(30, 1, {seed, 0}, Sigma3Layout::Start);
    CovModel width = make_sigma3(30, 1, {seed, 0}, Sigma3Layout::Width);
    for (Index i = 2; i <= 30; ++i) {
      const Index hi = (i + 1) / 2;
      const Index s = start.start_index[static_cast<std::size_t>(i - 1)];
      CHECK((s >= 1 && s <= hi));
      CHECK(start.true_band[static_cast<std::size_t>(i - 1)] == i - s);
      const Index kw = width.true_band[static_cast<std::size_t>(i - 1)];
      CHECK((kw >= 1 && kw <= hi));
      // same draw, read two ways
      CHECK(kw == s);
      for (auto* model : {&start, &width}) {
        Vector row = model->true_factors.row(i - 1);
        const Index k = band_support(row);
        CHECK(row.head(i - 1 - k).isZero());
        CHECK((row.tail(k).array() == 0.5).all());
      }
    }
  }
  CHECK(make_sigma3(30, 1, {5, 0}).true_band == make_sigma3(30, 1, {5, 0}).true_band);
}

TEST_CASE("models reconstruct consistently") {
  for (const CovModel& m : {make_sigma1(12), make_sigma2(12), make_sigma3(12, 2, {7, 0})}) {
    CHECK(nbtest::rel_frobenius(m.sigma * m.omega, Matrix::Identity(12, 12)) < 1e-8);
    CHECK(m.warning.empty());
  }
}

TEST_CASE("gaussian sampling") {
  CovModel m = make_sigma1(3);
  Dataset a = sample_gaussian(m, 10, {11, 2});
  Dataset b = sample_gaussian(m, 10, {11, 2});
  CHECK(a.values == b.values);
  CHECK_FALSE(a.centered);
  CHECK(a.values != sample_gaussian(m, 10, {11, 3}).values);

  Dataset big = sample_gaussian(m, 50000, {12, 0});
  CHECK((sample_covariance(big) - m.sigma).cwiseAbs().maxCoeff() < 0.02);

  CovModel white = make_model(ModelKind::Sigma1, CholeskyFactors::diagonal(Vector::Ones(3)));
  Dataset w = sample_gaussian(white, 50000, {13, 0});
  CHECK((sample_covariance(w) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 0.03);
  CHECK_THROWS_AS(sample_gaussian(m, 0, {1, 0}), DomainError);
}

TEST_CASE("t3 sampling has covariance 3 sigma and heavy tails") {
  CovModel m = make_sigma1(2);
  Dataset a = sample_t3(m, 100000, {14, 0});
  CHECK(a.values == sample_t3(m, 100000, {14, 0}).values);
  Matrix s = sample_covariance(a);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) CHECK(std::abs(s(i, j) / (3.0 * m.sigma(i, j)) - 1.0) < 0.05);

  const Vector x = a.values.col(0).array() - a.values.col(0).mean();
  const double m2 = x.array().square().mean();
  const double m4 = x.array().pow(4).mean();
  CHECK(m4 / (m2 * m2) > 3.0);
}

TEST_CASE("names") {
  CHECK(parse_model("sigma3") == ModelKind::Sigma3);
  CHECK(model_name(ModelKind::Sigma2) == "sigma2");
  CHECK(parse_distribution("t3") == Distribution::T3);
  CHECK(parse_sigma3_layout("width") == Sigma3Layout::Width);
  CHECK(sigma3_layout_name(Sigma3Layout::Start) == "start");
  CHECK_THROWS_AS(parse_model("sigma4"), ParseError);
  CHECK_THROWS_AS(parse_distribution("cauchy"), ParseError);
  CHECK_THROWS_AS(parse_sigma3_layout("middle"), ParseError);
}
