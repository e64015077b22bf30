#include "alphagp/signature.hpp"

namespace alphagp {

namespace {

void Encode(const AlphaExpr& expr, const Dsl& dsl, std::string& out) {
  switch (expr.kind) {
    case NodeKind::Field:
      out += 'f';
      return;
    case NodeKind::Window:
      out += 'w';
      return;
    case NodeKind::Constant:
      out += 'c';
      return;
    case NodeKind::Operator: {
      const OperatorSpec& spec = dsl.ops.At(expr.op_id);
      out += '(';
      for (SlotKind k : spec.slot_kinds) {
        out += (k == SlotKind::Data) ? 'D' : 'W';
      }
      for (const auto& c : expr.children) Encode(c, dsl, out);
      out += ')';
      return;
    }
  }
}

}  // namespace

StructureSignature SignatureOf(const AlphaExpr& expr, const Dsl& dsl) {
  std::string encoded;
  encoded.reserve(static_cast<std::size_t>(NodeCount(expr)) * 2);
  Encode(expr, dsl, encoded);
  return StructureSignature(std::move(encoded));
}

}  // namespace alphagp
