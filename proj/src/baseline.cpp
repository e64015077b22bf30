#include "alphagp/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>
#include <utility>

#include "alphagp/evaluator.hpp"
#include "alphagp/parser.hpp"
#include "gp_internal.hpp"

namespace alphagp {

namespace {

int EffectiveDepth(const BaselineGpConfig& config, const Dsl& dsl) {
  return config.max_depth > 0 ? config.max_depth : dsl.max_depth;
}

}  // namespace

void ValidateBaselineConfig(const BaselineGpConfig& config, const Dsl& dsl) {
  ValidateGpConfig(config.base);
  if (!(config.p_subtree >= 0.0 && config.p_subtree <= 1.0)) {
    throw InputError("p_subtree must lie in [0, 1]");
  }
  if (config.base.p_crossover + config.base.p_point + config.p_subtree >
      1.0) {
    throw InputError(
        "p_crossover + p_point + p_subtree must not exceed 1");
  }
  const int depth = EffectiveDepth(config, dsl);
  if (depth < 2) {
    throw InputError("baseline max_depth must be at least 2");
  }
  if (depth > dsl.max_depth) {
    throw InputError("baseline max_depth exceeds the language cap");
  }
  if (config.n_init_pop < 0 ||
      (config.n_init_pop > 0 && config.n_init_pop < 2)) {
    throw InputError("n_init_pop must be 0 or at least 2");
  }
}

std::optional<AlphaExpr> SubtreeCrossover(Rng& rng, const AlphaExpr& p1,
                                          const AlphaExpr& p2,
                                          int max_depth) {
  const std::vector<int> pos1 = DataNodeIndices(p1);
  const std::vector<int> pos2 = DataNodeIndices(p2);
  const int i1 = pos1[rng.UniformInt(0, static_cast<int>(pos1.size()) - 1)];
  const int i2 = pos2[rng.UniformInt(0, static_cast<int>(pos2.size()) - 1)];
  AlphaExpr child = WithNodeReplaced(p1, i1, NodeAt(p2, i2));
  if (Depth(child) > max_depth) return std::nullopt;
  return child;
}

AlphaExpr SubtreeMutation(Rng& rng, const Dsl& dsl, const AlphaExpr& p,
                          const GenOptions& options, int max_depth) {
  const std::vector<int> pos = DataNodeIndices(p);
  const int idx = pos[rng.UniformInt(0, static_cast<int>(pos.size()) - 1)];
  GenOptions sub = options;
  sub.max_depth = max_depth - DepthAtNode(p, idx) + 1;
  AlphaExpr fresh = RandomExpr(rng, dsl, sub);
  return WithNodeReplaced(p, idx, std::move(fresh));
}

GpRun RunTraditionalGp(const BaselineGpConfig& config,
                       const MarketPanel& panel, const ForwardReturns& fwd,
                       DateRange range, const Dsl& dsl) {
  ValidateBaselineConfig(config, dsl);
  const int depth = EffectiveDepth(config, dsl);
  const int n_init =
      config.n_init_pop > 0 ? config.n_init_pop : config.base.n_pop;
  internal::EvalContext ctx{panel,
                            fwd,
                            range,
                            dsl,
                            config.base.fitness,
                            config.base.n_threads};

  GpRun run;
  run.config = config.base;
  Rng rng(config.base.rng_seed);

  // Ramped initialization: target depths cycle over [2, depth] so the
  // first generation mixes shallow and deep shapes.
  Generation gen0;
  gen0.population.reserve(n_init);
  std::unordered_set<std::string> seen;
  std::vector<int> pending;
  const long long cap = config.base.DedupCap();
  long long rejections = 0;
  bool exhausted = false;
  for (long long j = 0; static_cast<int>(gen0.population.size()) < n_init;
       ++j) {
    GenOptions opts = config.base.gen;
    opts.max_depth = 2 + static_cast<int>(j % (depth - 1));
    AlphaExpr cand = RandomExpr(rng, dsl, opts);
    std::string printed = Print(cand, dsl);
    if (!seen.insert(printed).second) {
      ++run.dedup_rejections;
      if (++rejections >= cap) {
        exhausted = true;
        break;
      }
      continue;
    }
    pending.push_back(static_cast<int>(gen0.population.size()));
    Individual ind;
    ind.expr = std::move(cand);
    ind.printed = std::move(printed);
    gen0.population.push_back(std::move(ind));
  }
  internal::FitnessCache init_cache;
  init_cache.Score(gen0.population, pending, ctx);
  gen0.best = internal::BestIndex(gen0.population);
  run.generations.push_back(std::move(gen0));
  if (exhausted) {
    run.terminated_reason = TerminatedReason::PopulationExhausted;
    return run;
  }

  auto offspring = [&config, &dsl, depth](
                       Rng& r, const Generation& prev,
                       int) -> std::optional<AlphaExpr> {
    std::span<const Individual> pop(prev.population);
    const int k = config.base.tournament_size;
    const double u = r.UniformReal();
    if (u < config.base.p_crossover) {
      const Individual& a = pop[TournamentSelectIndex(r, pop, k)];
      const Individual& b = pop[TournamentSelectIndex(r, pop, k)];
      return SubtreeCrossover(r, a.expr, b.expr, depth);
    }
    if (u < config.base.p_crossover + config.base.p_point) {
      const Individual& parent = pop[TournamentSelectIndex(r, pop, k)];
      return PointMutation(r, dsl, parent.expr, config.base.gen);
    }
    if (u < config.base.p_crossover + config.base.p_point +
                config.p_subtree) {
      const Individual& parent = pop[TournamentSelectIndex(r, pop, k)];
      return SubtreeMutation(r, dsl, parent.expr, config.base.gen, depth);
    }
    return pop[TournamentSelectIndex(r, pop, k)].expr;
  };
  internal::Evolve(run, rng, ctx, offspring);
  return run;
}

SparsityReport SparsityExperiment(const SparsityOptions& options,
                                  const MarketPanel& panel,
                                  const ForwardReturns& fwd, DateRange range,
                                  const Dsl& dsl) {
  if (options.n_samples < 100) {
    throw InputError("sparsity experiment needs at least 100 samples");
  }
  if (!(options.threshold > 0.0) || !std::isfinite(options.threshold)) {
    throw InputError("sparsity threshold must be positive and finite");
  }
  if (options.histogram_bins < 1) {
    throw InputError("histogram needs at least one bin");
  }
  if (options.mode == SampleMode::SameStructure) {
    if (!options.donor) {
      throw InputError("SameStructure sampling needs a donor expression");
    }
    ValidateExpr(*options.donor, dsl);
  }

  Rng rng(options.rng_seed);
  std::vector<AlphaExpr> samples;
  samples.reserve(options.n_samples);
  for (int k = 0; k < options.n_samples; ++k) {
    if (options.mode == SampleMode::SameStructure) {
      samples.push_back(
          RandomSameStructure(rng, dsl, *options.donor, options.gen));
    } else {
      samples.push_back(RandomExpr(rng, dsl, options.gen));
    }
  }

  std::vector<BatchItem> evaluated =
      BatchEvaluate(samples, panel, dsl, options.n_threads);

  SparsityReport report;
  report.n_samples = options.n_samples;
  report.threshold = options.threshold;
  report.ic_values.reserve(options.n_samples);
  int effective = 0;
  double max_ic = 0.0;
  for (const BatchItem& item : evaluated) {
    double ic = 0.0;
    if (item.ok()) {
      try {
        ic = ComputeFitness(*item.result, fwd, range, options.fitness).ic;
      } catch (const FitnessError&) {
        // No scorable date: counts as zero.
      }
    }
    report.ic_values.push_back(ic);
    effective += ic > options.threshold;
    max_ic = std::max(max_ic, ic);
  }
  report.effective_fraction =
      static_cast<double>(effective) / options.n_samples;

  const int bins = options.histogram_bins;
  const double hi = std::max(max_ic, options.threshold);
  report.bin_edges.resize(bins + 1);
  for (int k = 0; k <= bins; ++k) {
    report.bin_edges[k] = hi * static_cast<double>(k) / bins;
  }
  report.histogram.assign(bins, 0);
  for (double ic : report.ic_values) {
    int bin = static_cast<int>(ic / hi * bins);
    bin = std::min(bin, bins - 1);
    ++report.histogram[bin];
  }
  return report;
}

}  // namespace alphagp
