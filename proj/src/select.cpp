#include "nestband/select.hpp"

#include "nestband/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>

namespace nestband {

namespace {

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (count < 1 || !(lo > 0.0) || !(hi >= lo)) {
    throw ParseError("log-spaced range needs 0 < lo <= hi and count >= 1");
  }
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    v[static_cast<std::size_t>(i)] = std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)));
  }
  return v;
}

double parse_number(const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v)) {
    throw ParseError("not a number: '" + text + "'");
  }
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

std::vector<double> parse_values(const std::string& text, bool integer) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    std::vector<double> out;
    for (const std::string& item : split(text, ',')) out.push_back(parse_number(item));
    if (out.empty()) throw ParseError("empty value list");
    return out;
  }
  const double lo = parse_number(text.substr(0, dots));
  std::string rest = text.substr(dots + 2);
  int count = -1;
  if (const auto slash = rest.find('/'); slash != std::string::npos) {
    count = static_cast<int>(parse_number(rest.substr(slash + 1)));
    rest = rest.substr(0, slash);
  }
  const double hi = parse_number(rest);
  if (integer) {
    std::vector<double> out;
    for (double k = lo; k <= hi; k += 1.0) out.push_back(k);
    if (out.empty()) throw ParseError("empty integer range '" + text + "'");
    return out;
  }
  if (count < 0) throw ParseError("range '" + text + "' needs a point count: lo..hi/count");
  return log_spaced(lo, hi, count);
}

PenaltyKind kind_of(const std::string& family) {
  if (family == "lasso") return PenaltyKind::Lasso;
  if (family == "j0") return PenaltyKind::NestedJ0;
  if (family == "j1") return PenaltyKind::NestedJ1;
  return PenaltyKind::NestedJ2;
}

TuningGrid build_grid(const std::string& family, const std::vector<double>& lambdas,
                      const std::vector<double>& lambda2s, bool lambda2_is_ratio,
                      const std::vector<double>& ks, Index p, Index n) {
  TuningGrid grid;
  if (family == "sample") {
    grid.candidates.push_back(EstimatorChoice::sample());
  } else if (family == "ledoit-wolf") {
    grid.candidates.push_back(EstimatorChoice::ledoit_wolf());
  } else if (family == "banding") {
    const Index cap = std::min(p - 1, n - 2);
    for (double k : ks) {
      if (k < 0.0 || k != std::floor(k)) throw ParseError("bandwidth must be a nonnegative integer");
      if (static_cast<Index>(k) <= cap) grid.candidates.push_back(EstimatorChoice::banding(static_cast<Index>(k)));
    }
    if (grid.candidates.empty()) throw ParseError("no bandwidth within [0, min(p-1, n-2)]");
  } else {
    const PenaltyKind kind = kind_of(family);
    for (double l : lambdas) {
      if (l < 0.0) throw ParseError("lambda must be nonnegative");
      if (kind != PenaltyKind::NestedJ2) {
        PenaltySpec spec{kind, l, 0.0};
        grid.candidates.push_back(kind == PenaltyKind::Lasso ? EstimatorChoice::lasso(l)
                                                             : EstimatorChoice::adaptive(spec));
        continue;
      }
      for (double l2 : lambda2s) {
        const double value = lambda2_is_ratio ? l2 * l : l2;
        if (value < 0.0) throw ParseError("lambda2 must be nonnegative");
        grid.candidates.push_back(EstimatorChoice::adaptive({kind, l, value}));
      }
    }
  }
  return grid;
}

}  // namespace

std::string TuningGrid::family() const {
  return candidates.empty() ? "" : candidates.front().family();
}

void TuningGrid::validate() const {
  if (candidates.empty()) throw DomainError("tuning grid is empty");
  const std::string f = family();
  for (const auto& c : candidates) {
    if (c.family() != f) throw DomainError("tuning grid mixes method families");
  }
}

bool is_family(const std::string& family) {
  return family == "sample" || family == "ledoit-wolf" || family == "banding" ||
         family == "lasso" || family == "j0" || family == "j1" || family == "j2";
}

TuningGrid default_grid(const std::string& family, Index p, Index n) {
  if (!is_family(family)) throw ParseError("unknown estimator '" + family + "'");
  std::vector<double> ks;
  const Index kmax = std::min<Index>({p - 1, n - 2, 20});
  for (Index k = 0; k <= kmax; ++k) ks.push_back(static_cast<double>(k));
  return build_grid(family, log_spaced(1e-3, 1e2, 10), {0.1, 1.0, 10.0}, true, ks, p, n);
}

TuningGrid parse_grid(const std::string& family, const std::string& spec, Index p, Index n) {
  if (!is_family(family)) throw ParseError("unknown estimator '" + family + "'");
  if (trim(spec).empty()) return default_grid(family, p, n);
  std::vector<double> lambdas = log_spaced(1e-3, 1e2, 10);
  std::vector<double> lambda2s{1.0};
  bool ratio = true;
  std::vector<double> ks;
  const Index kmax = std::min<Index>({p - 1, n - 2, 20});
  for (Index k = 0; k <= kmax; ++k) ks.push_back(static_cast<double>(k));
  for (const std::string& part : split(spec, ';')) {
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw ParseError("grid item '" + part + "' is not key=values");
    const std::string key = trim(part.substr(0, eq));
    const std::string value = trim(part.substr(eq + 1));
    if (key == "lambda") {
      lambdas = parse_values(value, false);
    } else if (key == "lambda2") {
      lambda2s = parse_values(value, false);
      ratio = false;
    } else if (key == "ratio") {
      lambda2s = parse_values(value, false);
      ratio = true;
    } else if (key == "k") {
      ks = parse_values(value, true);
    } else {
      throw ParseError("unknown grid key '" + key + "'");
    }
  }
  return build_grid(family, lambdas, lambda2s, ratio, ks, p, n);
}

bool sparser(const EstimatorChoice& a, const EstimatorChoice& b) {
  if (a.method == Method::Banding) return a.bandwidth < b.bandwidth;
  if (a.penalty.lambda != b.penalty.lambda) return a.penalty.lambda > b.penalty.lambda;
  return a.penalty.lambda2 > b.penalty.lambda2;
}

MaybeValue validation_score(const Estimate& estimate, const Dataset& held_out) {
  if (estimate.factors) return neg_log_likelihood(*estimate.factors, held_out);
  if (estimate.singular) return std::nullopt;
  const auto llt = spd_factor(estimate.covariance);
  if (!llt) return std::nullopt;
  const double log_det = 2.0 * Matrix(llt->matrixL()).diagonal().array().log().sum();
  const Matrix solved = llt->solve(held_out.values.transpose());
  const double quad = (held_out.values.transpose().array() * solved.array()).sum();
  return static_cast<double>(held_out.n()) * log_det + quad;
}

Selection pick_best(const TuningGrid& grid, std::vector<MaybeValue> scores) {
  if (scores.size() != grid.candidates.size()) throw DomainError("score count does not match grid");
  Selection s;
  bool found = false;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!scores[i]) continue;
    const bool better = !found || *scores[i] < *scores[s.best_index] ||
                        (*scores[i] == *scores[s.best_index] &&
                         sparser(grid.candidates[i], grid.candidates[s.best_index]));
    if (better) {
      s.best_index = i;
      found = true;
    }
  }
  if (!found) throw DomainError("no admissible candidate");
  s.best = grid.candidates[s.best_index];
  s.scores = std::move(scores);
  return s;
}

Selection select_on_validation(const Dataset& train, const Dataset& valid, const TuningGrid& grid,
                               const FitOptions& opts, Estimate* best_fit) {
  grid.validate();
  if (train.p() != valid.p()) throw DomainError("training and validation p differ");
  std::vector<MaybeValue> scores;
  std::vector<Estimate> fits;
  for (const auto& candidate : grid.candidates) {
    Estimate est;
    MaybeValue score;
    try {
      est = fit_estimator(train, candidate, opts);
      score = validation_score(est, valid);
    } catch (const DomainError&) {
      score.reset();  // infeasible for this data (e.g. k > n - 2)
    }
    scores.push_back(score);
    if (best_fit) fits.push_back(std::move(est));
  }
  Selection s = pick_best(grid, std::move(scores));
  if (best_fit) *best_fit = std::move(fits[s.best_index]);
  return s;
}

std::vector<int> fold_assignment(Index n, int folds, RngSeed seed) {
  if (folds < 2) throw DomainError("need at least 2 folds");
  if (n < folds) throw DomainError("fewer observations than folds");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  for (Index i = n - 1; i > 0; --i) {
    const auto k = static_cast<std::size_t>(rng.uniform_int(0, i));
    std::swap(order[static_cast<std::size_t>(i)], order[k]);
  }
  std::vector<int> label(static_cast<std::size_t>(n));
  Index pos = 0;
  for (int f = 0; f < folds; ++f) {
    const Index size = n / folds + (f < n % folds ? 1 : 0);
    for (Index i = 0; i < size; ++i) label[static_cast<std::size_t>(order[static_cast<std::size_t>(pos++)])] = f;
  }
  return label;
}

std::vector<MaybeValue> kfold_scores(const Dataset& data, const TuningGrid& grid, int folds,
                                     const FitOptions& opts, RngSeed seed) {
  grid.validate();
  const std::vector<int> label = fold_assignment(data.n(), folds, seed);
  std::vector<MaybeValue> total(grid.candidates.size(), 0.0);
  for (int f = 0; f < folds; ++f) {
    std::vector<Index> in, out;
    for (Index i = 0; i < data.n(); ++i) (label[static_cast<std::size_t>(i)] == f ? out : in).push_back(i);
    if (in.size() < 2) throw DomainError("a training fold has fewer than 2 observations");
    Matrix train_values(static_cast<Index>(in.size()), data.p());
    Matrix held_values(static_cast<Index>(out.size()), data.p());
    for (std::size_t r = 0; r < in.size(); ++r) train_values.row(static_cast<Index>(r)) = data.values.row(in[r]);
    for (std::size_t r = 0; r < out.size(); ++r) held_values.row(static_cast<Index>(r)) = data.values.row(out[r]);
    const Dataset train = center(make_dataset(std::move(train_values)));
    const Dataset held = shift_by(make_dataset(std::move(held_values)), train.column_means);
    for (std::size_t c = 0; c < grid.candidates.size(); ++c) {
      if (!total[c]) continue;
      MaybeValue s;
      try {
        s = validation_score(fit_estimator(train, grid.candidates[c], opts), held);
      } catch (const DomainError&) {
        s.reset();
      }
      if (s) {
        *total[c] += *s;
      } else {
        total[c].reset();
      }
    }
  }
  return total;
}

Selection select_kfold(const Dataset& data, const TuningGrid& grid, int folds,
                       const FitOptions& opts, RngSeed seed) {
  return pick_best(grid, kfold_scores(data, grid, folds, opts, seed));
}

}  // namespace nestband
