#pragma once

#include <stdexcept>
#include <string>

namespace alphagp {

// Base classes group errors by how the CLI maps them to exit codes:
// InputError -> 2, IoError -> 3, RunError -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class RunError : public Error {
 public:
  using Error::Error;
};

// Character range [begin, end) into the original source text.
struct SourceSpan {
  int begin = 0;
  int end = 0;
};

class ParseError : public InputError {
 public:
  enum class Kind {
    Syntax,
    UnknownOperator,
    UnknownField,
    ArityMismatch,
    WindowOutOfRange,
  };

  ParseError(Kind kind, SourceSpan span, const std::string& message)
      : InputError(message), kind_(kind), span_(span) {}

  Kind kind() const { return kind_; }
  SourceSpan span() const { return span_; }

 private:
  Kind kind_;
  SourceSpan span_;
};

// Structural violations in programmatically built expressions.
class ExprError : public InputError {
 public:
  using InputError::InputError;
};

class PanelError : public InputError {
 public:
  enum class Kind {
    MalformedRow,
    DuplicateCell,
    EmptyInput,
    MissingField,
    InvalidPlantStrength,
  };

  PanelError(Kind kind, const std::string& message, int line = 0)
      : InputError(message), kind_(kind), line_(line) {}

  Kind kind() const { return kind_; }
  int line() const { return line_; }

 private:
  Kind kind_;
  int line_;
};

class EvalError : public RunError {
 public:
  enum class Kind {
    MissingField,
    Overflow,
  };

  EvalError(Kind kind, const std::string& message)
      : RunError(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class FitnessError : public RunError {
 public:
  enum class Kind {
    NoValidDates,
  };

  FitnessError(Kind kind, const std::string& message)
      : RunError(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class GpError : public RunError {
 public:
  enum class Kind {
    SignatureMismatch,
    NoMutablePoint,
    EmptyPopulation,
    SeedEvaluationFailed,
  };

  GpError(Kind kind, const std::string& message)
      : RunError(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class ModelError : public RunError {
 public:
  enum class Kind {
    SingularDesign,
    NoTrainingRows,
  };

  ModelError(Kind kind, const std::string& message)
      : RunError(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class BacktestError : public RunError {
 public:
  enum class Kind {
    DateRangeOutOfPanel,
  };

  BacktestError(Kind kind, const std::string& message)
      : RunError(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace alphagp
