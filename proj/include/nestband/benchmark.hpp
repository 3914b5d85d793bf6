#pragma once

// Monte Carlo benchmark: simulate a model, tune every estimator on a
// validation set, score against the truth, aggregate over replications.

#include "nestband/evaluate.hpp"
#include "nestband/select.hpp"
#include "nestband/simulate.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace nestband {

struct ExperimentConfig {
  ModelKind model = ModelKind::Sigma1;
  Index p = 30;
  int blocks = 0;  // Sigma3 only; 0 picks default_sigma3_blocks(p)
  Sigma3Layout layout = Sigma3Layout::Start;
  Distribution distribution = Distribution::Gaussian;
  Index n_train = 100;
  Index n_valid = 100;
  int replications = 50;
  std::vector<std::string> estimators{"sample", "ledoit-wolf", "lasso", "j1", "j2", "banding"};
  std::map<std::string, std::string> grids;  // family -> grid spec
  std::uint64_t seed = 1;
  std::string output_dir;
  bool fixed_truth = false;  // Sigma3: one draw shared by all replications
  bool save_fits = false;    // keep every fitted factor and precision
  FitOptions fit;

  int effective_blocks() const;
  /// Throws DomainError (bad values) or ParseError (bad grid specs).
  void validate() const;
};

/// Every key accepted by apply_config_value, with a one-line description.
std::vector<std::pair<std::string, std::string>> config_keys();

/// Sets one key; "grid.<family>" sets a grid override. Throws ParseError.
void apply_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Flat "key = value" lines, '#' comments. Errors read "source:line: ...".
ExperimentConfig parse_config(const std::string& text, const std::string& source,
                              ExperimentConfig base = {});
ExperimentConfig read_config(const std::string& path);

/// The effective configuration in the same format.
std::string config_to_text(const ExperimentConfig& config);

struct ReplicationResult {
  std::string estimator;
  int replication = 0;
  std::string parameters;  // selected tuning values
  LossReport losses;
  Index bandwidth = -1;    // farthest nonzero lag over rows; -1 without factors
  bool failed = false;     // no estimate (every loss NA)
  Matrix factor;           // T, kept when save_fits
  Matrix precision;        // kept when save_fits
};

struct MetricSummary {
  MaybeValue mean;
  MaybeValue se;  // sample sd / sqrt(count); NA below 2 values
  int count = 0;  // non-NA values
};

struct EstimatorSummary {
  std::string estimator;
  MetricSummary kl, entropy, l1, l2, frobenius, linf, zeros_cholesky, zeros_precision;
  int fits = 0;              // fits entering the zero-frequency matrices
  Matrix zero_freq_factor;   // empty when fits == 0
  Matrix zero_freq_precision;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ReplicationResult> rows;  // replication-major, estimators in config order
  std::vector<EstimatorSummary> summary;
  std::vector<std::string> warnings;
};

MetricSummary summarize(const std::vector<MaybeValue>& values);

/// Thread cap from NESTBAND_THREADS (positive integer), else the hardware
/// concurrency.
int default_thread_count();

/// Deterministic given the config; `threads` <= 0 uses default_thread_count().
ExperimentReport run_benchmark(const ExperimentConfig& config, int threads = 0);

std::string summary_csv(const ExperimentReport& report);
std::string replications_csv(const ExperimentReport& report);

/// Writes summary.csv, replications.csv, warnings.txt, config.txt,
/// zero_freq_<estimator>_{factor,precision}.csv and, with save_fits,
/// fits/<estimator>/rep_XXX_{factor,precision}.csv. Creates `dir`.
void write_report(const ExperimentReport& report, const std::string& dir);

}  // namespace nestband
