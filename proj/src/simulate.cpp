#include "nestband/simulate.hpp"

#include "nestband/error.hpp"
#include "nestband/penalty.hpp"

#include <cmath>
#include <cstdio>

namespace nestband {

namespace {

Matrix cholesky_root(const Matrix& sigma) {
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) throw DomainError("model covariance is not positive definite");
  return llt.matrixL();
}

Dataset draw(const CovModel& model, Index n, RngSeed seed, bool heavy_tailed) {
  if (n < 1) throw DomainError("sample size must be positive");
  const Matrix l = cholesky_root(model.sigma);
  const Index p = model.p;
  Rng rng(seed);
  Matrix x(n, p);
  Vector z(p);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < p; ++k) z(k) = rng.normal();
    Vector xi = l.triangularView<Eigen::Lower>() * z;
    if (heavy_tailed) xi /= std::sqrt(rng.chi_square(3) / 3.0);
    x.row(i) = xi.transpose();
  }
  return make_dataset(std::move(x));
}

}  // namespace

CovModel make_model(ModelKind kind, CholeskyFactors factors) {
  CovModel m;
  m.kind = kind;
  m.p = factors.p();
  m.sigma = reconstruct_covariance(factors);
  m.omega = reconstruct_precision(factors);
  m.true_band = bandwidths(factors);
  m.true_factors = std::move(factors);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m.sigma, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  m.condition_number = lo > 0.0 ? hi / lo : kInfinity;
  if (!(m.condition_number <= kConditionWarning)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "true covariance is poorly conditioned (condition number %.3g)",
                  m.condition_number);
    m.warning = buf;
  }
  return m;
}

CovModel make_sigma1(Index p) {
  if (p < 1) throw DomainError("p must be positive");
  Matrix phi = Matrix::Zero(p, p);
  for (Index j = 1; j < p; ++j) phi(j, j - 1) = 0.8;
  return make_model(ModelKind::Sigma1,
                    CholeskyFactors(std::move(phi), Vector::Constant(p, kTrueInnovationVariance)));
}

CovModel make_sigma2(Index p) {
  if (p < 1) throw DomainError("p must be positive");
  Matrix phi = Matrix::Zero(p, p);
  for (Index j = 1; j < p; ++j) {
    for (Index l = 0; l < j; ++l) phi(j, l) = std::pow(0.5, static_cast<double>(j - l));
  }
  return make_model(ModelKind::Sigma2,
                    CholeskyFactors(std::move(phi), Vector::Constant(p, kTrueInnovationVariance)));
}

std::vector<Index> block_sizes(Index p, int blocks) {
  if (blocks < 1) throw DomainError("block count must be positive");
  if (blocks > p) throw DomainError("block count exceeds p");
  std::vector<Index> sizes(static_cast<std::size_t>(blocks), p / blocks);
  for (Index b = 0; b < p % blocks; ++b) ++sizes[static_cast<std::size_t>(b)];
  return sizes;
}

int default_sigma3_blocks(Index p) {
  if (p < 100) return 1;
  if (p < 200) return 3;
  return 6;
}

CovModel make_sigma3(Index p, int blocks, RngSeed seed, Sigma3Layout layout) {
  if (p < 1) throw DomainError("p must be positive");
  const std::vector<Index> sizes = block_sizes(p, blocks);
  Rng rng(seed);
  Matrix phi = Matrix::Zero(p, p);
  std::vector<Index> start(static_cast<std::size_t>(p), 0);
  Index offset = 0;
  for (Index size : sizes) {
    for (Index i = 2; i <= size; ++i) {  // local 1-based row index
      const Index hi = (i + 1) / 2;      // ceil(i / 2)
      const Index k = rng.uniform_int(1, hi);
      const Index s = layout == Sigma3Layout::Start ? k : i - k;
      const Index row = offset + i - 1;
      start[static_cast<std::size_t>(row)] = s;
      for (Index l = s; l <= i - 1; ++l) phi(row, offset + l - 1) = 0.5;
    }
    offset += size;
  }
  CovModel m = make_model(ModelKind::Sigma3,
                          CholeskyFactors(std::move(phi), Vector::Constant(p, kTrueInnovationVariance)));
  m.start_index = std::move(start);
  m.blocks = blocks;
  return m;
}

Dataset sample_gaussian(const CovModel& model, Index n, RngSeed seed) {
  return draw(model, n, seed, false);
}

Dataset sample_t3(const CovModel& model, Index n, RngSeed seed) {
  return draw(model, n, seed, true);
}

Dataset sample(const CovModel& model, Distribution dist, Index n, RngSeed seed) {
  return dist == Distribution::Gaussian ? sample_gaussian(model, n, seed)
                                        : sample_t3(model, n, seed);
}

std::string model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Sigma1: return "sigma1";
    case ModelKind::Sigma2: return "sigma2";
    case ModelKind::Sigma3: return "sigma3";
  }
  return "";
}

ModelKind parse_model(const std::string& name) {
  if (name == "sigma1") return ModelKind::Sigma1;
  if (name == "sigma2") return ModelKind::Sigma2;
  if (name == "sigma3") return ModelKind::Sigma3;
  throw ParseError("unknown model '" + name + "' (expected sigma1, sigma2 or sigma3)");
}

std::string sigma3_layout_name(Sigma3Layout layout) {
  return layout == Sigma3Layout::Start ? "start" : "width";
}

Sigma3Layout parse_sigma3_layout(const std::string& name) {
  if (name == "start") return Sigma3Layout::Start;
  if (name == "width") return Sigma3Layout::Width;
  throw ParseError("unknown sigma3 layout '" + name + "' (expected start or width)");
}

std::string distribution_name(Distribution dist) {
  return dist == Distribution::Gaussian ? "gaussian" : "t3";
}

Distribution parse_distribution(const std::string& name) {
  if (name == "gaussian") return Distribution::Gaussian;
  if (name == "t3") return Distribution::T3;
  throw ParseError("unknown distribution '" + name + "' (expected gaussian or t3)");
}

}  // namespace nestband
