#ifndef ALPHAGP_BASELINE_HPP_
#define ALPHAGP_BASELINE_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "alphagp/gp.hpp"

namespace alphagp {

// Traditional GP: ramped random initialization, unconstrained subtree
// crossover and subtree mutation, plus point mutation, all under the same
// selection, elitism, dedup, and termination machinery as the warm start.
struct BaselineGpConfig {
  // base.p_crossover drives subtree crossover and base.p_point point
  // mutation; together with p_subtree they must not exceed 1, and the
  // remainder is reproduction.
  GpConfig base;
  double p_subtree = 0.15;
  // Hard depth cap for every individual; 0 uses dsl.max_depth.
  int max_depth = 0;
  // Initial population target; 0 uses base.n_pop.
  int n_init_pop = 0;

  BaselineGpConfig() { base.p_point = 0.2; }
};

// Throws InputError; needs the language to bound max_depth.
void ValidateBaselineConfig(const BaselineGpConfig& config, const Dsl& dsl);

// Swaps a uniformly chosen data-position subtree of p1 (root included)
// with a uniformly chosen one of p2. Returns nullopt when the offspring
// would exceed max_depth; randomness is consumed either way.
std::optional<AlphaExpr> SubtreeCrossover(Rng& rng, const AlphaExpr& p1,
                                          const AlphaExpr& p2, int max_depth);

// Replaces a uniformly chosen data-position subtree with a fresh random
// tree grown within the remaining depth budget, so the result never
// exceeds max_depth.
AlphaExpr SubtreeMutation(Rng& rng, const Dsl& dsl, const AlphaExpr& p,
                          const GenOptions& options, int max_depth);

// Generation 0 is a ramped random population (target depths cycling over
// [2, max_depth], duplicates rejected); later generations follow the
// configured offspring menu. Depth-capped crossover rejections and
// duplicate rejections share the per-generation dedup budget.
GpRun RunTraditionalGp(const BaselineGpConfig& config,
                       const MarketPanel& panel, const ForwardReturns& fwd,
                       DateRange range, const Dsl& dsl);

// How the sparsity experiment draws its samples.
enum class SampleMode { Unconstrained, SameStructure };

struct SparsityOptions {
  int n_samples = 10000;  // at least 100
  double threshold = 0.03;
  SampleMode mode = SampleMode::Unconstrained;
  // Structure donor; required for SameStructure.
  std::optional<AlphaExpr> donor;
  GenOptions gen;
  std::uint64_t rng_seed = 0;
  int n_threads = 0;
  FitnessOptions fitness;
  int histogram_bins = 40;
};

struct SparsityReport {
  int n_samples = 0;
  // Sign-flipped IC per sample, in draw order; failed evaluations score 0.
  std::vector<double> ic_values;
  double threshold = 0.0;
  // Share of samples with ic strictly above threshold.
  double effective_fraction = 0.0;
  // histogram[k] counts values in [bin_edges[k], bin_edges[k+1]); the last
  // bin is closed. Edges span [0, max(max ic, threshold)].
  std::vector<double> bin_edges;
  std::vector<long long> histogram;
};

// Samples random alphas, scores each, and reports how rare "effective"
// ones are. Throws InputError on bad options.
SparsityReport SparsityExperiment(const SparsityOptions& options,
                                  const MarketPanel& panel,
                                  const ForwardReturns& fwd, DateRange range,
                                  const Dsl& dsl);

}  // namespace alphagp

#endif  // ALPHAGP_BASELINE_HPP_
