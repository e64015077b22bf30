#pragma once

#include "alphagp/expr.hpp"
#include "alphagp/rng.hpp"

namespace alphagp {

struct GenOptions {
  // Depth budget for generated trees; must not exceed dsl.max_depth.
  int max_depth = 6;
  // Probability of closing a data slot with a field leaf when an operator
  // would still fit.
  double terminal_prob = 0.3;
  // Constant leaves are resampled by a log-uniform factor in
  // [1/scale, scale] when rebuilding over a donor structure.
  double const_mutation_scale = 2.0;
};

// Grow-style random expression: each data position becomes an operator
// with probability 1 - terminal_prob while at least two levels of budget
// remain, otherwise a uniformly chosen field. Window slots draw uniformly
// from the language's window range. The result always passes ValidateExpr.
AlphaExpr RandomExpr(Rng& rng, const Dsl& dsl, const GenOptions& options);

// Random expression with exactly the structure signature of donor: every
// operator is resampled uniformly from its slot class, fields uniformly,
// windows uniformly, and constants scaled by a log-uniform factor.
AlphaExpr RandomSameStructure(Rng& rng, const Dsl& dsl, const AlphaExpr& donor,
                              const GenOptions& options);

}  // namespace alphagp
