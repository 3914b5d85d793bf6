#pragma once

// Tuning-parameter selection by held-out Gaussian likelihood.

#include "nestband/estimate.hpp"
#include "nestband/evaluate.hpp"
#include "nestband/rng.hpp"

#include <string>
#include <vector>

namespace nestband {

/// Candidates of a single method family, in grid order.
struct TuningGrid {
  std::vector<EstimatorChoice> candidates;

  std::string family() const;
  void validate() const;
};

/// Families: sample, ledoit-wolf, banding, lasso, j0, j1, j2.
bool is_family(const std::string& family);

/// lambda: 10 log-spaced points on [1e-3, 1e2]; J2 lambda2 in
/// {0.1, 1, 10} x lambda; banding k = 0..min(p-1, n-2, 20).
TuningGrid default_grid(const std::string& family, Index p, Index n);

/// Parses "key=values[;key=values]" with keys lambda, lambda2, ratio (lambda2
/// as a multiple of lambda) and k. Values are a comma list, "lo..hi/count"
/// (log-spaced; linear integer steps for k) or "lo..hi" for integer k. J2
/// without lambda2/ratio uses lambda2 = lambda. Banding k beyond
/// min(p-1, n-2) is dropped. An empty spec yields the default grid.
TuningGrid parse_grid(const std::string& family, const std::string& spec, Index p, Index n);

/// True when `a` is the sparser of two candidates of one family (smaller k,
/// larger lambda, then larger lambda2).
bool sparser(const EstimatorChoice& a, const EstimatorChoice& b);

/// Held-out negative log-likelihood n log|S_hat| + sum_i x_i' S_hat^{-1} x_i;
/// NA when the estimate is singular.
MaybeValue validation_score(const Estimate& estimate, const Dataset& held_out);

struct Selection {
  std::size_t best_index = 0;
  EstimatorChoice best;
  std::vector<MaybeValue> scores;  // per candidate, grid order
};

/// Minimizer of the scores with ties toward the sparser candidate. Throws
/// DomainError("no admissible candidate") when every score is NA.
Selection pick_best(const TuningGrid& grid, std::vector<MaybeValue> scores);

/// Fits each candidate on `train` (centered) and scores it on `valid`
/// (already shifted by the training means). When `best_fit` is non-null it
/// receives the selected candidate's training fit.
Selection select_on_validation(const Dataset& train, const Dataset& valid, const TuningGrid& grid,
                               const FitOptions& opts, Estimate* best_fit = nullptr);

/// Fold label per observation: seeded Fisher-Yates shuffle, then contiguous
/// near-equal folds.
std::vector<int> fold_assignment(Index n, int folds, RngSeed seed);

/// Per-candidate sum over folds of held-out negative log-likelihood; a
/// candidate that is NA on any fold is NA.
std::vector<MaybeValue> kfold_scores(const Dataset& data, const TuningGrid& grid, int folds,
                                     const FitOptions& opts, RngSeed seed);

Selection select_kfold(const Dataset& data, const TuningGrid& grid, int folds,
                       const FitOptions& opts, RngSeed seed);

}  // namespace nestband
