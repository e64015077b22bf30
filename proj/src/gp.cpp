#include "alphagp/gp.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <utility>

#include "alphagp/evaluator.hpp"
#include "alphagp/parser.hpp"
#include "gp_internal.hpp"

namespace alphagp {

namespace internal {

void FitnessCache::Prime(const std::vector<Individual>& population) {
  for (const Individual& ind : population) {
    scored_.emplace(ind.printed, std::make_pair(ind.fitness, ind.report));
  }
}

void FitnessCache::Score(std::vector<Individual>& population,
                         const std::vector<int>& pending,
                         const EvalContext& ctx) {
  std::vector<int> fresh;
  std::vector<AlphaExpr> exprs;
  for (int i : pending) {
    auto hit = scored_.find(population[i].printed);
    if (hit != scored_.end()) {
      population[i].fitness = hit->second.first;
      population[i].report = hit->second.second;
    } else {
      fresh.push_back(i);
      exprs.push_back(population[i].expr);
    }
  }
  std::vector<BatchItem> evaluated =
      BatchEvaluate(exprs, ctx.panel, ctx.dsl, ctx.n_threads);
  for (std::size_t k = 0; k < fresh.size(); ++k) {
    Individual& ind = population[fresh[k]];
    if (evaluated[k].ok()) {
      try {
        FitnessReport report = ComputeFitness(*evaluated[k].result, ctx.fwd,
                                              ctx.range, ctx.fitness);
        ind.fitness = report.ic;
        ind.report = std::move(report);
      } catch (const FitnessError&) {
        // No usable date: scored as worthless, kept in the population.
      }
    }
    scored_.emplace(ind.printed, std::make_pair(ind.fitness, ind.report));
  }
}

int BestIndex(const std::vector<Individual>& population) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(population.size()); ++i) {
    if (population[i].fitness > population[best].fitness) best = i;
  }
  return best;
}

void Evolve(GpRun& run, Rng& rng, const EvalContext& ctx,
            const OffspringFn& make_offspring) {
  const GpConfig& config = run.config;
  const long long cap = config.DedupCap();
  FitnessCache cache;
  cache.Prime(run.generations.front().population);

  int stagnant = 0;
  for (int g = 1; g <= config.max_generations; ++g) {
    const Generation& prev = run.generations.back();
    Generation next;
    next.population.reserve(config.n_pop);
    std::unordered_set<std::string> seen;

    // Elitism, generation 1 included (the seed can survive forever).
    next.population.push_back(prev.Best());
    seen.insert(next.population.back().printed);

    std::vector<int> pending;
    long long rejections = 0;
    bool exhausted = false;
    while (static_cast<int>(next.population.size()) < config.n_pop) {
      std::optional<AlphaExpr> cand = make_offspring(rng, prev, g);
      if (!cand) {
        ++run.depth_rejections;
        if (++rejections >= cap) {
          exhausted = true;
          break;
        }
        continue;
      }
      std::string printed = Print(*cand, ctx.dsl);
      if (!seen.insert(printed).second) {
        ++run.dedup_rejections;
        if (++rejections >= cap) {
          exhausted = true;
          break;
        }
        continue;
      }
      pending.push_back(static_cast<int>(next.population.size()));
      Individual ind;
      ind.expr = std::move(*cand);
      ind.printed = std::move(printed);
      next.population.push_back(std::move(ind));
    }

    cache.Score(next.population, pending, ctx);
    next.best = BestIndex(next.population);
    const double prev_best = prev.Best().fitness;
    const double gen_best = next.Best().fitness;
    run.generations.push_back(std::move(next));

    if (exhausted) {
      run.terminated_reason = TerminatedReason::PopulationExhausted;
      return;
    }
    stagnant = (gen_best - prev_best) >= config.min_improvement ? 0
                                                                : stagnant + 1;
    if (stagnant >= config.stagnation_patience) {
      run.terminated_reason = TerminatedReason::Stagnation;
      return;
    }
  }
  run.terminated_reason = TerminatedReason::MaxGenerations;
}

}  // namespace internal

void ValidateGpConfig(const GpConfig& config) {
  if (config.n_pop < 2) {
    throw InputError("n_pop must be at least 2");
  }
  for (double p : {config.p_crossover, config.p_point}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw InputError("offspring probabilities must lie in [0, 1]");
    }
  }
  if (config.p_crossover + config.p_point > 1.0) {
    throw InputError("p_crossover + p_point must not exceed 1");
  }
  if (config.tournament_size < 2 || config.tournament_size > config.n_pop) {
    throw InputError("tournament_size must lie in [2, n_pop]");
  }
  if (config.max_generations < 0) {
    throw InputError("max_generations must be non-negative");
  }
  if (config.stagnation_patience < 1) {
    throw InputError("stagnation_patience must be positive");
  }
  if (!(config.min_improvement >= 0.0) ||
      !std::isfinite(config.min_improvement)) {
    throw InputError("min_improvement must be finite and non-negative");
  }
  if (config.dedup_attempt_cap < 0) {
    throw InputError("dedup_attempt_cap must be non-negative");
  }
  if (config.n_threads < 0) {
    throw InputError("n_threads must be non-negative");
  }
}

const char* ToString(TerminatedReason reason) {
  switch (reason) {
    case TerminatedReason::MaxGenerations:
      return "max_generations";
    case TerminatedReason::Stagnation:
      return "stagnation";
    case TerminatedReason::PopulationExhausted:
      return "population_exhausted";
  }
  return "unknown";
}

AlphaExpr RestrictedCrossover(Rng& rng, const Dsl& dsl, const AlphaExpr& p1,
                              const AlphaExpr& p2) {
  if (!(SignatureOf(p1, dsl) == SignatureOf(p2, dsl))) {
    throw GpError(GpError::Kind::SignatureMismatch,
                  "crossover parents have different structures: " +
                      Print(p1, dsl) + " vs " + Print(p2, dsl));
  }
  const int n = NodeCount(p1);
  // Swapping at the root would just copy p2, so it is only used when the
  // tree has no other position.
  const int pos = n == 1 ? 0 : rng.UniformInt(1, n - 1);
  return WithNodeReplaced(p1, pos, NodeAt(p2, pos));
}

AlphaExpr PointMutation(Rng& rng, const Dsl& dsl, const AlphaExpr& p,
                        const GenOptions& options) {
  const int n = NodeCount(p);
  for (int attempt = 0; attempt < n; ++attempt) {
    const int idx = rng.UniformInt(0, n - 1);
    const AlphaExpr& node = NodeAt(p, idx);
    AlphaExpr relabeled = node;
    switch (node.kind) {
      case NodeKind::Operator: {
        const std::vector<int>& klass = dsl.ops.SameSlotClass(node.op_id);
        if (klass.size() < 2) continue;
        int r = rng.UniformInt(0, static_cast<int>(klass.size()) - 2);
        for (int op : klass) {
          if (op == node.op_id) continue;
          if (r-- == 0) {
            relabeled.op_id = op;
            break;
          }
        }
        break;
      }
      case NodeKind::Field: {
        const int n_fields = static_cast<int>(dsl.fields.size());
        if (n_fields < 2) continue;
        int r = rng.UniformInt(0, n_fields - 2);
        if (r >= node.field_id) ++r;
        relabeled.field_id = r;
        break;
      }
      case NodeKind::Window: {
        const int span = dsl.window_max - dsl.window_min + 1;
        if (span < 2) continue;
        int w = dsl.window_min + rng.UniformInt(0, span - 2);
        if (w >= node.window_days) ++w;
        relabeled.window_days = w;
        break;
      }
      case NodeKind::Constant: {
        // Scaling cannot move zero, and scale 1 cannot move anything.
        if (node.const_value == 0.0 || options.const_mutation_scale <= 1.0) {
          continue;
        }
        const double log_s = std::log(options.const_mutation_scale);
        relabeled.const_value =
            node.const_value * std::exp(rng.UniformReal(-log_s, log_s));
        break;
      }
    }
    return WithNodeReplaced(p, idx, std::move(relabeled));
  }
  throw GpError(GpError::Kind::NoMutablePoint,
                "no node of " + Print(p, dsl) +
                    " has an alternative label in this language");
}

int TournamentSelectIndex(Rng& rng, std::span<const Individual> population,
                          int k) {
  if (population.empty()) {
    throw GpError(GpError::Kind::EmptyPopulation,
                  "tournament over an empty population");
  }
  k = std::min(k, static_cast<int>(population.size()));
  k = std::max(k, 1);
  std::vector<int> entrants =
      rng.SampleWithoutReplacement(static_cast<int>(population.size()), k);
  int winner = entrants[0];
  for (int idx : entrants) {
    if (population[idx].fitness > population[winner].fitness ||
        (population[idx].fitness == population[winner].fitness &&
         idx < winner)) {
      winner = idx;
    }
  }
  return winner;
}

GpRun RunWarmStart(const GpConfig& config, const AlphaExpr& seed,
                   const MarketPanel& panel, const ForwardReturns& fwd,
                   DateRange range, const Dsl& dsl) {
  ValidateGpConfig(config);
  ValidateExpr(seed, dsl);
  internal::EvalContext ctx{panel,          fwd,
                            range,          dsl,
                            config.fitness, config.n_threads};

  GpRun run;
  run.config = config;
  run.seed_alpha = seed;
  run.signature = SignatureOf(seed, dsl);

  Individual first;
  first.expr = seed;
  first.printed = Print(seed, dsl);
  try {
    AlphaMatrix alpha = Evaluate(seed, panel, dsl);
    FitnessReport report = ComputeFitness(alpha, fwd, range, config.fitness);
    first.fitness = report.ic;
    first.report = std::move(report);
  } catch (const Error& e) {
    throw GpError(GpError::Kind::SeedEvaluationFailed,
                  "seed " + first.printed + ": " + e.what());
  }
  Generation gen0;
  gen0.population.push_back(std::move(first));
  run.generations.push_back(std::move(gen0));

  Rng rng(config.rng_seed);
  auto offspring = [&config, &dsl](Rng& r, const Generation& prev,
                                   int g) -> std::optional<AlphaExpr> {
    std::span<const Individual> pop(prev.population);
    const int k = config.tournament_size;
    // Generation 1 spreads out by single-point edits of the seed.
    if (g == 1) {
      const Individual& parent = pop[TournamentSelectIndex(r, pop, k)];
      return PointMutation(r, dsl, parent.expr, config.gen);
    }
    const double u = r.UniformReal();
    if (u < config.p_crossover) {
      const Individual& a = pop[TournamentSelectIndex(r, pop, k)];
      const Individual& b = pop[TournamentSelectIndex(r, pop, k)];
      return RestrictedCrossover(r, dsl, a.expr, b.expr);
    }
    if (u < config.p_crossover + config.p_point) {
      const Individual& parent = pop[TournamentSelectIndex(r, pop, k)];
      return PointMutation(r, dsl, parent.expr, config.gen);
    }
    return pop[TournamentSelectIndex(r, pop, k)].expr;
  };
  internal::Evolve(run, rng, ctx, offspring);
  return run;
}

std::vector<SeedRunResult> RunMultiSeed(const GpConfig& config,
                                        std::span<const AlphaExpr> seeds,
                                        const MarketPanel& panel,
                                        const ForwardReturns& fwd,
                                        DateRange range, const Dsl& dsl) {
  std::vector<SeedRunResult> results;
  results.reserve(seeds.size());
  for (std::size_t r = 0; r < seeds.size(); ++r) {
    GpConfig derived = config;
    derived.rng_seed = config.rng_seed + r;
    SeedRunResult out;
    try {
      out.run = RunWarmStart(derived, seeds[r], panel, fwd, range, dsl);
    } catch (const Error& e) {
      out.error = e.what();
    }
    results.push_back(std::move(out));
  }
  return results;
}

}  // namespace alphagp
