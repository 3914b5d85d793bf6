#pragma once

// Ground-truth covariance models defined through their Cholesky factors, and
// Gaussian / multivariate t3 samplers.

#include "nestband/cholcore.hpp"
#include "nestband/rng.hpp"

#include <string>
#include <vector>

namespace nestband {

enum class ModelKind { Sigma1, Sigma2, Sigma3 };

struct CovModel {
  ModelKind kind = ModelKind::Sigma1;
  Index p = 0;
  CholeskyFactors true_factors;
  Matrix sigma;
  Matrix omega;
  std::vector<Index> true_band;    // per-row bandwidth
  std::vector<Index> start_index;  // Sigma3: 1-based first predictor within the block
  int blocks = 1;
  double condition_number = 1.0;
  std::string warning;  // non-empty when sigma is poorly conditioned
};

inline constexpr double kTrueInnovationVariance = 0.01;
inline constexpr double kConditionWarning = 1e10;

/// phi_{j,j-1} = 0.8, other coefficients zero.
CovModel make_sigma1(Index p);

/// phi_{j,j'} = 0.5^{j-j'}.
CovModel make_sigma2(Index p);

/// How the Sigma3 draw k_i ~ U(1, ceil(i/2)) shapes row i.
///   Start: k_i is the first predictor, row i uses local predecessors k_i..i-1.
///   Width: k_i is the bandwidth, row i uses local predecessors i-k_i..i-1.
enum class Sigma3Layout { Start, Width };

/// Independent contiguous blocks of near-equal size; inside each block the
/// row with local index i >= 2 regresses on its predecessors (see
/// Sigma3Layout) with coefficient 0.5.
CovModel make_sigma3(Index p, int blocks, RngSeed seed, Sigma3Layout layout = Sigma3Layout::Start);

/// Default block count for Sigma3: 1 below p = 100, 3 below p = 200, else 6.
int default_sigma3_blocks(Index p);

/// Builds a model from arbitrary factors.
CovModel make_model(ModelKind kind, CholeskyFactors factors);

/// Sizes of near-equal contiguous blocks, remainder spread from the front.
std::vector<Index> block_sizes(Index p, int blocks);

enum class Distribution { Gaussian, T3 };

Dataset sample_gaussian(const CovModel& model, Index n, RngSeed seed);

/// x = L z / sqrt(w / 3), w ~ chi-square(3). The scale matrix is
/// model.sigma, so the covariance of the draws is 3 * model.sigma.
Dataset sample_t3(const CovModel& model, Index n, RngSeed seed);

Dataset sample(const CovModel& model, Distribution dist, Index n, RngSeed seed);

std::string model_name(ModelKind kind);
ModelKind parse_model(const std::string& name);
std::string sigma3_layout_name(Sigma3Layout layout);
Sigma3Layout parse_sigma3_layout(const std::string& name);
std::string distribution_name(Distribution dist);
Distribution parse_distribution(const std::string& name);

}  // namespace nestband
