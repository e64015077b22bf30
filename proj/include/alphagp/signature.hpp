#pragma once

#include <string>

#include "alphagp/expr.hpp"

namespace alphagp {

// Label-erased tree skeleton. Two expressions share a signature exactly
// when they have the same shape, the same slot-kind sequence at every
// operator position, and the same leaf kind at every leaf position.
// Operator names, field names, window values, and constant values are all
// erased.
//
// Encoding: Field leaf "f", Window leaf "w", Constant leaf "c", operator
// "(" + one slot char per child ('D' or 'W') + child encodings + ")".
// sub(close,open) and div(high,low) both encode as "(DDff)".
class StructureSignature {
 public:
  StructureSignature() = default;
  explicit StructureSignature(std::string encoded) : encoded_(std::move(encoded)) {}

  const std::string& str() const { return encoded_; }

  bool operator==(const StructureSignature& other) const = default;
  auto operator<=>(const StructureSignature& other) const = default;

 private:
  std::string encoded_;
};

StructureSignature SignatureOf(const AlphaExpr& expr, const Dsl& dsl);

}  // namespace alphagp
