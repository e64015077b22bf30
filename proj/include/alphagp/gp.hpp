#ifndef ALPHAGP_GP_HPP_
#define ALPHAGP_GP_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alphagp/errors.hpp"
#include "alphagp/expr.hpp"
#include "alphagp/fitness.hpp"
#include "alphagp/panel.hpp"
#include "alphagp/random_expr.hpp"
#include "alphagp/rng.hpp"
#include "alphagp/signature.hpp"

namespace alphagp {

// Knobs for the evolutionary search. The offspring menu is crossover with
// probability p_crossover, point mutation with p_point, and reproduction
// (a plain copy of the tournament winner) with the remainder.
struct GpConfig {
  int n_pop = 200;
  double p_crossover = 0.6;
  double p_point = 0.35;
  int tournament_size = 5;
  // Generations built beyond generation 0; 0 means the run stops after
  // evaluating the seed.
  int max_generations = 30;
  // Stop after this many consecutive generations whose best improves by
  // less than min_improvement.
  int stagnation_patience = 10;
  double min_improvement = 1e-4;
  // Rejected duplicates allowed while filling one generation; 0 picks the
  // default of 50 * n_pop.
  long long dedup_attempt_cap = 0;
  std::uint64_t rng_seed = 0;
  // Workers for fitness evaluation; 0 uses the hardware count. Results do
  // not depend on this: randomness is consumed only on the sequential path.
  int n_threads = 0;
  FitnessOptions fitness;
  // Point mutation reuses const_mutation_scale; the depth/terminal knobs
  // only matter for the unconstrained baseline.
  GenOptions gen;

  long long DedupCap() const {
    return dedup_attempt_cap > 0 ? dedup_attempt_cap
                                 : 50LL * static_cast<long long>(n_pop);
  }
};

// Throws InputError when probabilities or sizes are out of range.
void ValidateGpConfig(const GpConfig& config);

struct Individual {
  AlphaExpr expr;
  std::string printed;
  // Sign-flipped IC; 0 when evaluation or fitness failed (report absent).
  double fitness = 0.0;
  std::optional<FitnessReport> report;
};

struct Generation {
  std::vector<Individual> population;
  // Index of the max-fitness individual, ties to the lower index.
  int best = 0;

  const Individual& Best() const { return population[best]; }
};

enum class TerminatedReason { MaxGenerations, Stagnation, PopulationExhausted };

const char* ToString(TerminatedReason reason);

struct GpRun {
  GpConfig config;
  // Set for warm-start runs; the unconstrained baseline leaves them empty.
  std::optional<AlphaExpr> seed_alpha;
  std::optional<StructureSignature> signature;
  std::vector<Generation> generations;
  TerminatedReason terminated_reason = TerminatedReason::MaxGenerations;
  // Offspring discarded for printing identically to an already-accepted
  // member of the generation under construction.
  long long dedup_rejections = 0;
  // Offspring discarded before deduplication (the baseline's depth-capped
  // crossover); counts against the same per-generation budget.
  long long depth_rejections = 0;

  // Elitism makes the last generation's best the best of the whole run.
  const Individual& Best() const { return generations.back().Best(); }
};

// Swaps the subtree at one uniformly chosen position of p1 with p2's
// subtree at the same position. Both parents must share a signature, which
// the offspring then keeps. The root position is used only for one-node
// trees, where it is the sole option.
// Throws GpError(SignatureMismatch).
AlphaExpr RestrictedCrossover(Rng& rng, const Dsl& dsl, const AlphaExpr& p1,
                              const AlphaExpr& p2);

// Relabels exactly one uniformly chosen node within its kind class:
// operators draw from the same-slot registry class, fields from the field
// list, windows from [window_min, window_max], constants are scaled by a
// log-uniform factor in [1/s, s]. The current label is excluded, so the
// result always differs from p at that node; nodes whose class is a
// singleton are redrawn, up to NodeCount(p) attempts.
// Throws GpError(NoMutablePoint) when no node can change.
AlphaExpr PointMutation(Rng& rng, const Dsl& dsl, const AlphaExpr& p,
                        const GenOptions& options);

// k-tournament: samples k distinct indices, returns the one with maximal
// fitness, ties to the lower index. k is clamped to the population size,
// so early tiny generations still select. Throws GpError(EmptyPopulation).
int TournamentSelectIndex(Rng& rng, std::span<const Individual> population,
                          int k);

// Algorithm: generation 0 is the seed alone; generation 1 is filled by
// point mutation of tournament winners; later generations first insert the
// previous best (elitism, also done for generation 1), then fill from the
// crossover / point-mutation / reproduction menu. Offspring that print
// identically to an accepted member are rejected; when a generation's
// rejection budget is exhausted the run keeps the smaller population and
// stops with PopulationExhausted. Every individual carries the seed's
// structure signature.
// Throws GpError(SeedEvaluationFailed) when the seed itself cannot be
// scored on the panel.
GpRun RunWarmStart(const GpConfig& config, const AlphaExpr& seed,
                   const MarketPanel& panel, const ForwardReturns& fwd,
                   DateRange range, const Dsl& dsl);

struct SeedRunResult {
  std::optional<GpRun> run;
  // Failure description when the run could not start; empty on success.
  std::string error;

  bool ok() const { return run.has_value(); }
};

// Independent warm starts, one per seed, with derived rng seeds
// config.rng_seed + index. Failures are captured per run.
std::vector<SeedRunResult> RunMultiSeed(const GpConfig& config,
                                        std::span<const AlphaExpr> seeds,
                                        const MarketPanel& panel,
                                        const ForwardReturns& fwd,
                                        DateRange range, const Dsl& dsl);

}  // namespace alphagp

#endif  // ALPHAGP_GP_HPP_
