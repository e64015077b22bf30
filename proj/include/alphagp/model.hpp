#pragma once

#include <span>
#include <vector>

#include "alphagp/evaluator.hpp"
#include "alphagp/panel.hpp"

namespace alphagp {

// Pooled linear combination of alpha features. Each feature is z-scored
// within its date's cross-section (sample std) before entering the fit,
// and prediction applies the same per-date standardization, so the
// coefficients are comparable across features regardless of raw scale.
struct LinearAlphaModel {
  std::vector<AlphaExpr> feature_exprs;  // source trees, parallel to features
  std::vector<double> coefficients;
  double intercept = 0.0;
  DateRange train_range;
};

// Fits forward returns on the standardized features over train_range by
// ordinary least squares (normal equations, partial-pivot elimination).
// A (date, stock) cell contributes one row when every feature and the
// forward return are defined there; a feature counts as undefined for a
// whole date when fewer than two cells are present or the cross-sectional
// std is below 1e-12. Throws InputError on empty or mismatched inputs,
// ModelError: NoTrainingRows when no cell survives, SingularDesign naming
// the offending feature when a column is linearly dependent.
LinearAlphaModel FitLinearModel(std::span<const AlphaMatrix> features,
                                const ForwardReturns& fwd,
                                DateRange train_range);

// Scores for one date: intercept + sum of coefficient * z-scored feature,
// standardized against that date's own cross-section. A stock's score is
// missing when any feature is missing there; the whole vector is missing
// when some feature has a degenerate cross-section that date. The feature
// span must match the model's coefficient count and agree in shape.
std::vector<double> PredictScores(const LinearAlphaModel& model,
                                  std::span<const AlphaMatrix> features,
                                  int date_index);

}  // namespace alphagp
