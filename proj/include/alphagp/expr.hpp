#pragma once

#include <optional>
#include <string>
#include <vector>

#include "alphagp/errors.hpp"

namespace alphagp {

// Slot kinds distinguish data-bearing children from integer window
// parameters. Window slots never hold subexpressions.
enum class SlotKind { Data, Window };

// Built-in evaluation semantics. Registry entries alias one of these, so a
// custom registry can rename or subset operators without new code.
enum class OpSemantics {
  Add,
  Sub,
  Mul,
  Div,
  Abs,
  Log,
  Sign,
  Neg,
  Rank,
  Scale,
  TsMean,
  TsStd,
  TsMin,
  TsMax,
  TsSum,
  TsRank,
  TsArgMax,
  TsArgMin,
  Delay,
  Delta,
  DecayLinear,
  TsCorr,
  TsCov,
};

struct OperatorSpec {
  std::string name;
  std::vector<SlotKind> slot_kinds;
  OpSemantics semantics;
  std::string description;

  int Arity() const { return static_cast<int>(slot_kinds.size()); }
};

// Immutable catalog of operators. Ids are dense indices in insertion order.
class OperatorRegistry {
 public:
  // Throws ExprError on duplicate name, empty slot list, or a slot list
  // with no Data slot.
  int Add(OperatorSpec spec);

  int size() const { return static_cast<int>(specs_.size()); }
  const OperatorSpec& At(int op_id) const;
  std::optional<int> Find(const std::string& name) const;

  // Ids of all operators with the same slot-kind sequence as op_id,
  // including op_id itself, in id order.
  const std::vector<int>& SameSlotClass(int op_id) const;

 private:
  std::vector<OperatorSpec> specs_;
  std::vector<std::pair<std::string, int>> by_name_;
  mutable std::vector<std::vector<int>> class_cache_;
};

// Language definition: operators, field names, window bounds, depth cap.
struct Dsl {
  OperatorRegistry ops;
  std::vector<std::string> fields;
  int window_min = 2;
  int window_max = 60;
  int max_depth = 8;

  std::optional<int> FieldId(const std::string& name) const;
};

// The full default language: 8 elementwise ops, rank/scale, 11 time-series
// ops, 8 market fields, windows in [2, 60], depth cap 8.
Dsl MakeDefaultDsl();

// Language description from JSON. Every key is optional and defaults to the
// stock language:
//
//   {
//     "operators": [{"name": "my_add", "semantics": "add"}, ...],
//     "fields": ["open", "close", ...],
//     "window_min": 2, "window_max": 60, "max_depth": 8
//   }
//
// "semantics" names a default operator and fixes the slot layout; it
// defaults to the operator's own name. Throws InputError on malformed
// JSON, unknown semantics, or inconsistent bounds.
Dsl LoadDslFromJson(const std::string& json_text);

enum class NodeKind { Operator, Field, Window, Constant };

// Expression tree as a value type. Operator nodes own one child per slot;
// Window children occupy their slot positions so preorder indices cover
// every node in the tree.
struct AlphaExpr {
  NodeKind kind = NodeKind::Field;
  int op_id = -1;
  int field_id = -1;
  int window_days = 0;
  double const_value = 0.0;
  std::vector<AlphaExpr> children;

  bool operator==(const AlphaExpr& other) const;

  static AlphaExpr Op(int op_id, std::vector<AlphaExpr> children);
  static AlphaExpr FieldRef(int field_id);
  static AlphaExpr Window(int days);
  static AlphaExpr Const(double value);
};

int NodeCount(const AlphaExpr& expr);
int Depth(const AlphaExpr& expr);

// Preorder node access; index 0 is the root. Throws ExprError when out of
// range.
const AlphaExpr& NodeAt(const AlphaExpr& expr, int preorder_index);

// Depth of the node at preorder_index measured from the root (root = 1).
int DepthAtNode(const AlphaExpr& expr, int preorder_index);

// Copy of expr with the node at preorder_index replaced by subtree.
AlphaExpr WithNodeReplaced(const AlphaExpr& expr, int preorder_index,
                           const AlphaExpr& subtree);

// Preorder indices of nodes that carry data values (everything except
// Window leaves). The root is always included.
std::vector<int> DataNodeIndices(const AlphaExpr& expr);

// Full structural validation against a language: arities, slot kinds,
// window bounds, field ids, depth cap. Throws ExprError.
void ValidateExpr(const AlphaExpr& expr, const Dsl& dsl);

}  // namespace alphagp
