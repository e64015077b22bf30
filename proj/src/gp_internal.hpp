#ifndef ALPHAGP_SRC_GP_INTERNAL_HPP_
#define ALPHAGP_SRC_GP_INTERNAL_HPP_

#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "alphagp/gp.hpp"

// Machinery shared between the warm-start search and the traditional
// baseline: fitness scoring with memoization, and the generation loop with
// elitism, duplicate rejection, and the stop rules.

namespace alphagp::internal {

struct EvalContext {
  const MarketPanel& panel;
  const ForwardReturns& fwd;
  DateRange range;
  const Dsl& dsl;
  FitnessOptions fitness;
  int n_threads = 0;
};

// Scores individuals in place, memoized by printed form so elites and
// re-discovered expressions are never re-evaluated. Failed evaluations and
// fitness computations leave fitness at 0 with no report.
class FitnessCache {
 public:
  // Remembers already-scored individuals (e.g. generation 0).
  void Prime(const std::vector<Individual>& population);

  // Fills fitness/report for population[i], i in pending. Expression
  // evaluation runs on ctx.n_threads workers; everything else is
  // sequential, so results are worker-count independent.
  void Score(std::vector<Individual>& population,
             const std::vector<int>& pending, const EvalContext& ctx);

 private:
  std::unordered_map<std::string,
                     std::pair<double, std::optional<FitnessReport>>>
      scored_;
};

// Index of the max-fitness individual, ties to the lower index.
int BestIndex(const std::vector<Individual>& population);

// Proposes one candidate for the generation being built (argument: the
// previous generation and the 1-based index of the new one). Returning
// nullopt rejects the draw (the baseline uses this for depth-capped
// crossover); rejections of either kind count against the generation's
// dedup_attempt_cap budget.
using OffspringFn =
    std::function<std::optional<AlphaExpr>(Rng&, const Generation&, int)>;

// Appends generations to run (which must already hold generation 0) until
// a stop rule fires, setting run.terminated_reason and the rejection
// counters. Randomness is consumed only while proposing offspring.
void Evolve(GpRun& run, Rng& rng, const EvalContext& ctx,
            const OffspringFn& make_offspring);

}  // namespace alphagp::internal

#endif  // ALPHAGP_SRC_GP_INTERNAL_HPP_
