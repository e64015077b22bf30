#include "alphagp/parser.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <string>

namespace alphagp {

namespace {

struct Token {
  enum class Type { Ident, Number, LParen, RParen, Comma, End };
  Type type = Type::End;
  SourceSpan span;
  std::string_view text;
  double number = 0.0;
  bool is_integer = false;
  long long int_value = 0;
};

const char* TokenName(Token::Type type) {
  switch (type) {
    case Token::Type::Ident: return "identifier";
    case Token::Type::Number: return "number";
    case Token::Type::LParen: return "'('";
    case Token::Type::RParen: return "')'";
    case Token::Type::Comma: return "','";
    case Token::Type::End: return "end of input";
  }
  return "?";
}

class Lexer {
 public:
  explicit Lexer(std::string_view source) : source_(source) { Advance(); }

  const Token& Peek() const { return current_; }

  Token Next() {
    Token t = current_;
    Advance();
    return t;
  }

 private:
  void Advance() {
    while (pos_ < source_.size() &&
           std::isspace(static_cast<unsigned char>(source_[pos_]))) {
      ++pos_;
    }
    int begin = static_cast<int>(pos_);
    if (pos_ >= source_.size()) {
      current_ = {Token::Type::End, {begin, begin}, {}, 0.0, false, 0};
      return;
    }
    char c = source_[pos_];
    if (c == '(' || c == ')' || c == ',') {
      ++pos_;
      Token::Type type = c == '(' ? Token::Type::LParen
                       : c == ')' ? Token::Type::RParen
                                  : Token::Type::Comma;
      current_ = {type, {begin, begin + 1}, source_.substr(begin, 1), 0.0, false, 0};
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < source_.size() &&
             (std::isalnum(static_cast<unsigned char>(source_[end])) ||
              source_[end] == '_')) {
        ++end;
      }
      current_ = {Token::Type::Ident,
                  {begin, static_cast<int>(end)},
                  source_.substr(pos_, end - pos_),
                  0.0,
                  false,
                  0};
      pos_ = end;
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '.') {
      LexNumber(begin);
      return;
    }
    throw ParseError(ParseError::Kind::Syntax, {begin, begin + 1},
                     "unexpected character '" + std::string(1, c) + "'");
  }

  void LexNumber(int begin) {
    std::size_t end = pos_;
    bool has_digits = false;
    bool is_integer = true;
    if (end < source_.size() && source_[end] == '-') ++end;
    while (end < source_.size() &&
           std::isdigit(static_cast<unsigned char>(source_[end]))) {
      ++end;
      has_digits = true;
    }
    if (end < source_.size() && source_[end] == '.') {
      is_integer = false;
      ++end;
      while (end < source_.size() &&
             std::isdigit(static_cast<unsigned char>(source_[end]))) {
        ++end;
        has_digits = true;
      }
    }
    if (has_digits && end < source_.size() &&
        (source_[end] == 'e' || source_[end] == 'E')) {
      std::size_t exp = end + 1;
      if (exp < source_.size() && (source_[exp] == '+' || source_[exp] == '-')) {
        ++exp;
      }
      if (exp < source_.size() &&
          std::isdigit(static_cast<unsigned char>(source_[exp]))) {
        is_integer = false;
        end = exp;
        while (end < source_.size() &&
               std::isdigit(static_cast<unsigned char>(source_[end]))) {
          ++end;
        }
      }
    }
    SourceSpan span{begin, static_cast<int>(end)};
    if (!has_digits) {
      throw ParseError(ParseError::Kind::Syntax, span, "malformed number");
    }
    std::string_view text = source_.substr(pos_, end - pos_);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw ParseError(ParseError::Kind::Syntax, span, "malformed number");
    }
    long long int_value = 0;
    if (is_integer) {
      auto [iptr, iec] =
          std::from_chars(text.data(), text.data() + text.size(), int_value);
      if (iec != std::errc() || iptr != text.data() + text.size()) {
        is_integer = false;
      }
    }
    current_ = {Token::Type::Number, span, text, value, is_integer, int_value};
    pos_ = end;
  }

  std::string_view source_;
  std::size_t pos_ = 0;
  Token current_;
};

class Parser {
 public:
  Parser(std::string_view source, const Dsl& dsl) : lexer_(source), dsl_(dsl) {}

  AlphaExpr Run() {
    AlphaExpr expr = ParseData();
    const Token& t = lexer_.Peek();
    if (t.type != Token::Type::End) {
      throw ParseError(ParseError::Kind::Syntax, t.span,
                       std::string("unexpected ") + TokenName(t.type) +
                           " after expression");
    }
    return expr;
  }

 private:
  AlphaExpr ParseData() {
    const Token& t = lexer_.Peek();
    if (t.type == Token::Type::Number) {
      Token num = lexer_.Next();
      return AlphaExpr::Const(num.number);
    }
    if (t.type != Token::Type::Ident) {
      throw ParseError(ParseError::Kind::Syntax, t.span,
                       std::string("expected expression, found ") +
                           TokenName(t.type));
    }
    Token name = lexer_.Next();
    if (lexer_.Peek().type != Token::Type::LParen) {
      std::optional<int> field = dsl_.FieldId(std::string(name.text));
      if (!field) {
        throw ParseError(ParseError::Kind::UnknownField, name.span,
                         "unknown field '" + std::string(name.text) + "'");
      }
      return AlphaExpr::FieldRef(*field);
    }
    std::optional<int> op = dsl_.ops.Find(std::string(name.text));
    if (!op) {
      throw ParseError(ParseError::Kind::UnknownOperator, name.span,
                       "unknown operator '" + std::string(name.text) + "'");
    }
    const OperatorSpec& spec = dsl_.ops.At(*op);
    lexer_.Next();  // consume '('
    std::vector<AlphaExpr> children;
    children.reserve(spec.slot_kinds.size());
    for (int i = 0; i < spec.Arity(); ++i) {
      if (i > 0) {
        const Token& sep = lexer_.Peek();
        if (sep.type == Token::Type::RParen) {
          throw ParseError(
              ParseError::Kind::ArityMismatch,
              {name.span.begin, sep.span.end},
              spec.name + " expects " + std::to_string(spec.Arity()) +
                  " arguments, got " + std::to_string(i));
        }
        if (sep.type != Token::Type::Comma) {
          throw ParseError(ParseError::Kind::Syntax, sep.span,
                           std::string("expected ',', found ") +
                               TokenName(sep.type));
        }
        lexer_.Next();
      }
      if (spec.slot_kinds[i] == SlotKind::Window) {
        children.push_back(ParseWindow(spec));
      } else {
        children.push_back(ParseData());
      }
    }
    const Token& close = lexer_.Peek();
    if (close.type == Token::Type::Comma) {
      throw ParseError(ParseError::Kind::ArityMismatch,
                       {name.span.begin, close.span.end},
                       spec.name + " expects " + std::to_string(spec.Arity()) +
                           " arguments, got more");
    }
    if (close.type != Token::Type::RParen) {
      throw ParseError(ParseError::Kind::Syntax, close.span,
                       std::string("expected ')', found ") +
                           TokenName(close.type));
    }
    lexer_.Next();
    return AlphaExpr::Op(*op, std::move(children));
  }

  AlphaExpr ParseWindow(const OperatorSpec& spec) {
    const Token& t = lexer_.Peek();
    if (t.type != Token::Type::Number || !t.is_integer) {
      throw ParseError(ParseError::Kind::Syntax, t.span,
                       "window argument of " + spec.name +
                           " must be an integer literal");
    }
    Token num = lexer_.Next();
    if (num.int_value < dsl_.window_min || num.int_value > dsl_.window_max) {
      throw ParseError(ParseError::Kind::WindowOutOfRange, num.span,
                       "window " + std::string(num.text) + " outside [" +
                           std::to_string(dsl_.window_min) + ", " +
                           std::to_string(dsl_.window_max) + "]");
    }
    return AlphaExpr::Window(static_cast<int>(num.int_value));
  }

  Lexer lexer_;
  const Dsl& dsl_;
};

void PrintNode(const AlphaExpr& expr, const Dsl& dsl, std::string& out) {
  switch (expr.kind) {
    case NodeKind::Field:
      out += dsl.fields.at(expr.field_id);
      return;
    case NodeKind::Window:
      out += std::to_string(expr.window_days);
      return;
    case NodeKind::Constant:
      out += FormatDouble(expr.const_value);
      return;
    case NodeKind::Operator: {
      out += dsl.ops.At(expr.op_id).name;
      out += '(';
      for (std::size_t i = 0; i < expr.children.size(); ++i) {
        if (i > 0) out += ',';
        PrintNode(expr.children[i], dsl, out);
      }
      out += ')';
      return;
    }
  }
}

}  // namespace

AlphaExpr Parse(std::string_view source, const Dsl& dsl) {
  Parser parser(source, dsl);
  AlphaExpr expr = parser.Run();
  // Slots, arities, and windows are correct by construction; this can only
  // reject on the depth cap.
  ValidateExpr(expr, dsl);
  return expr;
}

std::string Print(const AlphaExpr& expr, const Dsl& dsl) {
  std::string out;
  PrintNode(expr, dsl, out);
  return out;
}

std::string FormatDouble(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) {
    return "0";
  }
  return std::string(buf, ptr);
}

}  // namespace alphagp
