#pragma once

#include <string>
#include <string_view>

#include "alphagp/expr.hpp"

namespace alphagp {

// Parses the call-syntax alpha DSL:
//
//   expr := name '(' arg (',' arg)* ')' | field | number
//
// Window slots accept only integer literals within the language's window
// bounds. Integer literals in data slots become constants. Whitespace is
// allowed anywhere between tokens. Throws ParseError with a source span;
// the result satisfies ValidateExpr.
AlphaExpr Parse(std::string_view source, const Dsl& dsl);

// Canonical form: no whitespace, constants printed with shortest
// round-trip formatting. Parse(Print(e)) == e for every valid e.
std::string Print(const AlphaExpr& expr, const Dsl& dsl);

// Shortest decimal string that parses back to exactly this double.
std::string FormatDouble(double value);

}  // namespace alphagp
