#pragma once

#include <optional>
#include <span>
#include <vector>

#include "alphagp/evaluator.hpp"
#include "alphagp/panel.hpp"

namespace alphagp {

struct FitnessOptions {
  // A date enters the IC average only when at least this many stocks have
  // both an alpha value and a forward return.
  int min_cross_section = 20;
  // Coverage floor: scoring fails unless at least this many dates enter.
  // Zero disables the floor. Ignored by AlphaCorrelationMatrix.
  int min_dates = 0;
};

// Pearson correlation of one date's cross-section; nullopt when fewer
// than min_count pairs or either side has zero variance.
std::optional<double> DailyPearson(std::span<const double> alpha,
                                   std::span<const double> fwd,
                                   int min_count = 20);

// Spearman rank correlation with average ties, same skip rules.
std::optional<double> DailySpearman(std::span<const double> alpha,
                                    std::span<const double> fwd,
                                    int min_count = 20);

// Information-coefficient family over a date range. A raw mean daily IC
// below zero flips the alpha's sign: every reported metric and both daily
// series describe the flipped alpha, and sign records the flip.
struct FitnessReport {
  double ic = 0.0;
  std::optional<double> icir;      // absent when fewer than 2 dates
  double rank_ic = 0.0;
  std::optional<double> rank_icir;
  int sign = 1;  // +1 kept, -1 flipped
  int n_dates_used = 0;
  std::vector<int> date_indices;   // panel date indices that entered
  std::vector<double> daily_ic;    // parallel to date_indices
  std::vector<double> daily_rank_ic;
};

// Throws FitnessError (NoValidDates) when fewer than max(1, min_dates)
// dates in the range clear the cross-section minimum. The alpha and
// forward returns must share the panel's shape.
FitnessReport ComputeFitness(const AlphaMatrix& alpha,
                             const ForwardReturns& fwd, DateRange range,
                             const FitnessOptions& options = {});

// Inter-alpha similarity: entry (i, j) is the mean over dates in range of
// the cross-sectional Spearman correlation between the two alphas' values,
// with the same per-date skip rules as the IC. Diagonal is 1, the matrix
// is symmetric.
struct CorrelationSummary {
  Matrix corr;  // n_alphas x n_alphas
  double mean_abs_off_diagonal = 0.0;  // over unordered off-diagonal pairs
};

// Throws InputError on fewer than two alphas or mismatched shapes, and
// FitnessError (NoValidDates) when some pair has no usable date.
CorrelationSummary AlphaCorrelationMatrix(std::span<const AlphaMatrix> alphas,
                                          DateRange range,
                                          const FitnessOptions& options = {});

}  // namespace alphagp
