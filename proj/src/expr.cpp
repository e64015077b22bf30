#include "alphagp/expr.hpp"

#include <algorithm>
#include <cmath>

namespace alphagp {

int OperatorRegistry::Add(OperatorSpec spec) {
  if (spec.name.empty()) {
    throw ExprError("operator name must be non-empty");
  }
  if (Find(spec.name)) {
    throw ExprError("duplicate operator name: " + spec.name);
  }
  if (spec.slot_kinds.empty()) {
    throw ExprError("operator " + spec.name + " must take at least one slot");
  }
  bool has_data = std::any_of(spec.slot_kinds.begin(), spec.slot_kinds.end(),
                              [](SlotKind k) { return k == SlotKind::Data; });
  if (!has_data) {
    throw ExprError("operator " + spec.name + " must take at least one data slot");
  }
  int id = static_cast<int>(specs_.size());
  by_name_.emplace_back(spec.name, id);
  specs_.push_back(std::move(spec));
  class_cache_.clear();
  return id;
}

const OperatorSpec& OperatorRegistry::At(int op_id) const {
  if (op_id < 0 || op_id >= size()) {
    throw ExprError("operator id out of range: " + std::to_string(op_id));
  }
  return specs_[op_id];
}

std::optional<int> OperatorRegistry::Find(const std::string& name) const {
  for (const auto& [known, id] : by_name_) {
    if (known == name) return id;
  }
  return std::nullopt;
}

const std::vector<int>& OperatorRegistry::SameSlotClass(int op_id) const {
  At(op_id);
  if (class_cache_.empty()) {
    class_cache_.resize(specs_.size());
    for (int i = 0; i < size(); ++i) {
      for (int j = 0; j < size(); ++j) {
        if (specs_[i].slot_kinds == specs_[j].slot_kinds) {
          class_cache_[i].push_back(j);
        }
      }
    }
  }
  return class_cache_[op_id];
}

std::optional<int> Dsl::FieldId(const std::string& name) const {
  for (int i = 0; i < static_cast<int>(fields.size()); ++i) {
    if (fields[i] == name) return i;
  }
  return std::nullopt;
}

Dsl MakeDefaultDsl() {
  Dsl dsl;
  const SlotKind D = SlotKind::Data;
  const SlotKind W = SlotKind::Window;
  auto add = [&dsl](const char* name, std::vector<SlotKind> slots,
                    OpSemantics sem, const char* desc) {
    dsl.ops.Add({name, std::move(slots), sem, desc});
  };

  add("add", {D, D}, OpSemantics::Add, "elementwise x + y");
  add("sub", {D, D}, OpSemantics::Sub, "elementwise x - y");
  add("mul", {D, D}, OpSemantics::Mul, "elementwise x * y");
  add("div", {D, D}, OpSemantics::Div, "elementwise x / y, guarded near zero");
  add("abs", {D}, OpSemantics::Abs, "elementwise |x|");
  add("log", {D}, OpSemantics::Log, "elementwise ln x, missing for x <= 0");
  add("sign", {D}, OpSemantics::Sign, "elementwise sign in {-1, 0, 1}");
  add("neg", {D}, OpSemantics::Neg, "elementwise -x");
  add("rank", {D}, OpSemantics::Rank, "cross-sectional rank in [0, 1] per date");
  add("scale", {D}, OpSemantics::Scale, "x / sum |x| per date");
  add("ts_mean", {D, W}, OpSemantics::TsMean, "trailing mean over d days");
  add("ts_std", {D, W}, OpSemantics::TsStd, "trailing sample std over d days");
  add("ts_min", {D, W}, OpSemantics::TsMin, "trailing min over d days");
  add("ts_max", {D, W}, OpSemantics::TsMax, "trailing max over d days");
  add("ts_sum", {D, W}, OpSemantics::TsSum, "trailing sum over d days");
  add("ts_rank", {D, W}, OpSemantics::TsRank,
      "rank of today's value within the trailing window, in [0, 1]");
  add("ts_argmax", {D, W}, OpSemantics::TsArgMax,
      "days since the trailing-window max (0 = today)");
  add("ts_argmin", {D, W}, OpSemantics::TsArgMin,
      "days since the trailing-window min (0 = today)");
  add("delay", {D, W}, OpSemantics::Delay, "value d days ago");
  add("delta", {D, W}, OpSemantics::Delta, "today minus d days ago");
  add("decay_linear", {D, W}, OpSemantics::DecayLinear,
      "linearly decaying weighted mean, newest weighted most");
  add("ts_corr", {D, D, W}, OpSemantics::TsCorr,
      "trailing Pearson correlation of x and y over d days");
  add("ts_cov", {D, D, W}, OpSemantics::TsCov,
      "trailing sample covariance of x and y over d days");

  dsl.fields = {"open",   "high",   "low",      "close",
                "vwap",   "volume", "turnover", "returns"};
  dsl.window_min = 2;
  dsl.window_max = 60;
  dsl.max_depth = 8;
  return dsl;
}

bool AlphaExpr::operator==(const AlphaExpr& other) const {
  if (kind != other.kind) return false;
  switch (kind) {
    case NodeKind::Operator:
      if (op_id != other.op_id) return false;
      break;
    case NodeKind::Field:
      if (field_id != other.field_id) return false;
      break;
    case NodeKind::Window:
      if (window_days != other.window_days) return false;
      break;
    case NodeKind::Constant:
      if (const_value != other.const_value) return false;
      break;
  }
  return children == other.children;
}

AlphaExpr AlphaExpr::Op(int op_id, std::vector<AlphaExpr> children) {
  AlphaExpr e;
  e.kind = NodeKind::Operator;
  e.op_id = op_id;
  e.children = std::move(children);
  return e;
}

AlphaExpr AlphaExpr::FieldRef(int field_id) {
  AlphaExpr e;
  e.kind = NodeKind::Field;
  e.field_id = field_id;
  return e;
}

AlphaExpr AlphaExpr::Window(int days) {
  AlphaExpr e;
  e.kind = NodeKind::Window;
  e.window_days = days;
  return e;
}

AlphaExpr AlphaExpr::Const(double value) {
  AlphaExpr e;
  e.kind = NodeKind::Constant;
  e.const_value = value;
  return e;
}

int NodeCount(const AlphaExpr& expr) {
  int n = 1;
  for (const auto& c : expr.children) n += NodeCount(c);
  return n;
}

int Depth(const AlphaExpr& expr) {
  int d = 0;
  for (const auto& c : expr.children) d = std::max(d, Depth(c));
  return d + 1;
}

namespace {

const AlphaExpr* FindNode(const AlphaExpr& expr, int& remaining) {
  if (remaining == 0) return &expr;
  --remaining;
  for (const auto& c : expr.children) {
    if (const AlphaExpr* found = FindNode(c, remaining)) return found;
  }
  return nullptr;
}

bool ReplaceNode(AlphaExpr& expr, int& remaining, const AlphaExpr& subtree) {
  if (remaining == 0) {
    expr = subtree;
    return true;
  }
  --remaining;
  for (auto& c : expr.children) {
    if (ReplaceNode(c, remaining, subtree)) return true;
  }
  return false;
}

int FindDepth(const AlphaExpr& expr, int& remaining, int depth) {
  if (remaining == 0) return depth;
  --remaining;
  for (const auto& c : expr.children) {
    int d = FindDepth(c, remaining, depth + 1);
    if (d > 0) return d;
  }
  return 0;
}

void CollectDataIndices(const AlphaExpr& expr, int& index,
                        std::vector<int>& out) {
  if (expr.kind != NodeKind::Window) out.push_back(index);
  ++index;
  for (const auto& c : expr.children) CollectDataIndices(c, index, out);
}

void ValidateNode(const AlphaExpr& expr, const Dsl& dsl, SlotKind expected) {
  if (expected == SlotKind::Window) {
    if (expr.kind != NodeKind::Window) {
      throw ExprError("window slot must hold a window leaf");
    }
    if (expr.window_days < dsl.window_min || expr.window_days > dsl.window_max) {
      throw ExprError("window " + std::to_string(expr.window_days) +
                      " outside [" + std::to_string(dsl.window_min) + ", " +
                      std::to_string(dsl.window_max) + "]");
    }
    if (!expr.children.empty()) {
      throw ExprError("window leaf must have no children");
    }
    return;
  }
  switch (expr.kind) {
    case NodeKind::Window:
      throw ExprError("window leaf in data slot");
    case NodeKind::Field:
      if (expr.field_id < 0 ||
          expr.field_id >= static_cast<int>(dsl.fields.size())) {
        throw ExprError("field id out of range: " + std::to_string(expr.field_id));
      }
      if (!expr.children.empty()) {
        throw ExprError("field leaf must have no children");
      }
      return;
    case NodeKind::Constant:
      if (!std::isfinite(expr.const_value)) {
        throw ExprError("constant leaf must be finite");
      }
      if (!expr.children.empty()) {
        throw ExprError("constant leaf must have no children");
      }
      return;
    case NodeKind::Operator: {
      const OperatorSpec& spec = dsl.ops.At(expr.op_id);
      if (static_cast<int>(expr.children.size()) != spec.Arity()) {
        throw ExprError("operator " + spec.name + " expects " +
                        std::to_string(spec.Arity()) + " children, got " +
                        std::to_string(expr.children.size()));
      }
      for (int i = 0; i < spec.Arity(); ++i) {
        ValidateNode(expr.children[i], dsl, spec.slot_kinds[i]);
      }
      return;
    }
  }
}

}  // namespace

const AlphaExpr& NodeAt(const AlphaExpr& expr, int preorder_index) {
  if (preorder_index < 0) {
    throw ExprError("negative preorder index");
  }
  int remaining = preorder_index;
  const AlphaExpr* found = FindNode(expr, remaining);
  if (!found) {
    throw ExprError("preorder index " + std::to_string(preorder_index) +
                    " out of range");
  }
  return *found;
}

int DepthAtNode(const AlphaExpr& expr, int preorder_index) {
  if (preorder_index < 0) {
    throw ExprError("negative preorder index");
  }
  int remaining = preorder_index;
  int depth = FindDepth(expr, remaining, 1);
  if (depth == 0) {
    throw ExprError("preorder index " + std::to_string(preorder_index) +
                    " out of range");
  }
  return depth;
}

AlphaExpr WithNodeReplaced(const AlphaExpr& expr, int preorder_index,
                           const AlphaExpr& subtree) {
  if (preorder_index < 0) {
    throw ExprError("negative preorder index");
  }
  AlphaExpr copy = expr;
  int remaining = preorder_index;
  if (!ReplaceNode(copy, remaining, subtree)) {
    throw ExprError("preorder index " + std::to_string(preorder_index) +
                    " out of range");
  }
  return copy;
}

std::vector<int> DataNodeIndices(const AlphaExpr& expr) {
  std::vector<int> out;
  int index = 0;
  CollectDataIndices(expr, index, out);
  return out;
}

void ValidateExpr(const AlphaExpr& expr, const Dsl& dsl) {
  ValidateNode(expr, dsl, SlotKind::Data);
  int depth = Depth(expr);
  if (depth > dsl.max_depth) {
    throw ExprError("expression depth " + std::to_string(depth) +
                    " exceeds cap " + std::to_string(dsl.max_depth));
  }
}

}  // namespace alphagp
