#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alphagp/expr.hpp"
#include "alphagp/panel.hpp"

namespace alphagp {

// Alpha values over a panel, tagged with where they came from.
struct AlphaMatrix {
  Matrix values;
  AlphaExpr source;
  std::string panel_id;
};

// Evaluates expr over the whole panel. Conventions:
//  - missing inputs make the output cell missing; time-series operators
//    need every day of their trailing window defined (delay and delta only
//    need the two cells they touch);
//  - division guards |denominator| < 1e-12, log guards x <= 0;
//  - rank is the cross-sectional average-tie rank mapped to [0, 1] per
//    date (single-element dates rank 0.5); scale divides by the date's
//    sum of absolute values;
//  - cross-sectional operators see only the date's universe, and the final
//    matrix is masked to the universe.
// Throws EvalError: MissingField when the language references a field the
// panel lacks, Overflow when the result contains an infinity. The
// expression must satisfy ValidateExpr.
AlphaMatrix Evaluate(const AlphaExpr& expr, const MarketPanel& panel,
                     const Dsl& dsl);

struct BatchItem {
  std::optional<AlphaMatrix> result;
  std::string error;  // empty on success

  bool ok() const { return result.has_value(); }
};

// Evaluates many expressions, capturing per-item failures instead of
// throwing. Output order matches input order and is identical to a serial
// run regardless of n_threads.
std::vector<BatchItem> BatchEvaluate(std::span<const AlphaExpr> exprs,
                                     const MarketPanel& panel, const Dsl& dsl,
                                     int n_threads = 0);

// date,stock_id,value rows for the defined cells, date-major.
void WriteAlphaCsv(const AlphaMatrix& alpha, const MarketPanel& panel,
                   std::ostream& out);

}  // namespace alphagp
