#include "alphagp/random_expr.hpp"

#include <cmath>

namespace alphagp {

namespace {

AlphaExpr RandomField(Rng& rng, const Dsl& dsl) {
  return AlphaExpr::FieldRef(
      rng.UniformInt(0, static_cast<int>(dsl.fields.size()) - 1));
}

AlphaExpr RandomWindow(Rng& rng, const Dsl& dsl) {
  return AlphaExpr::Window(rng.UniformInt(dsl.window_min, dsl.window_max));
}

AlphaExpr Grow(Rng& rng, const Dsl& dsl, const GenOptions& options,
               int budget) {
  // An operator needs two levels: itself plus leaf children.
  if (budget < 2 || rng.Bernoulli(options.terminal_prob)) {
    return RandomField(rng, dsl);
  }
  int op_id = rng.UniformInt(0, dsl.ops.size() - 1);
  const OperatorSpec& spec = dsl.ops.At(op_id);
  std::vector<AlphaExpr> children;
  children.reserve(spec.slot_kinds.size());
  for (SlotKind slot : spec.slot_kinds) {
    if (slot == SlotKind::Window) {
      children.push_back(RandomWindow(rng, dsl));
    } else {
      children.push_back(Grow(rng, dsl, options, budget - 1));
    }
  }
  return AlphaExpr::Op(op_id, std::move(children));
}

AlphaExpr Rebuild(Rng& rng, const Dsl& dsl, const GenOptions& options,
                  const AlphaExpr& donor) {
  switch (donor.kind) {
    case NodeKind::Field:
      return RandomField(rng, dsl);
    case NodeKind::Window:
      return RandomWindow(rng, dsl);
    case NodeKind::Constant: {
      double log_scale = std::log(options.const_mutation_scale);
      double factor = std::exp(rng.UniformReal(-log_scale, log_scale));
      return AlphaExpr::Const(donor.const_value * factor);
    }
    case NodeKind::Operator: {
      const std::vector<int>& peers = dsl.ops.SameSlotClass(donor.op_id);
      int op_id = peers[rng.UniformInt(0, static_cast<int>(peers.size()) - 1)];
      std::vector<AlphaExpr> children;
      children.reserve(donor.children.size());
      for (const AlphaExpr& c : donor.children) {
        children.push_back(Rebuild(rng, dsl, options, c));
      }
      return AlphaExpr::Op(op_id, std::move(children));
    }
  }
  throw ExprError("unreachable node kind");
}

}  // namespace

AlphaExpr RandomExpr(Rng& rng, const Dsl& dsl, const GenOptions& options) {
  if (options.max_depth < 1 || options.max_depth > dsl.max_depth) {
    throw ExprError("generation depth budget outside [1, max_depth]");
  }
  return Grow(rng, dsl, options, options.max_depth);
}

AlphaExpr RandomSameStructure(Rng& rng, const Dsl& dsl,
                              const AlphaExpr& donor,
                              const GenOptions& options) {
  if (options.const_mutation_scale <= 1.0) {
    throw ExprError("const_mutation_scale must exceed 1");
  }
  return Rebuild(rng, dsl, options, donor);
}

}  // namespace alphagp
