#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dagmc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
public:
  NotPositiveDefinite(std::size_t pivot, double value);
  std::size_t pivot() const { return pivot_; }

private:
  std::size_t pivot_;
};

class UnknownDensity : public Error {
public:
  explicit UnknownDensity(const std::string& name);
};

class BadArity : public Error {
public:
  using Error::Error;
};

class InvalidParameter : public Error {
public:
  using Error::Error;
};

/// Raised while evaluating an expression.
class EvaluationError : public Error {
public:
  using Error::Error;
};

class DomainError : public EvaluationError {
public:
  using EvaluationError::EvaluationError;
};

class UnboundIdentifier : public EvaluationError {
public:
  explicit UnboundIdentifier(const std::string& name);
};

/// Parse failure with a 1-based source position.
class SyntaxError : public Error {
public:
  SyntaxError(const std::string& message, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& message() const { return message_; }

private:
  std::string message_;
  int line_;
  int column_;
};

/// Structural problems with a model: graph construction, replication,
/// overrides and configuration.
class ModelError : public Error {
public:
  enum class Kind {
    UnknownParent,
    CycleDetected,
    DuplicateName,
    UnknownNode,
    ReplicateUnknownNode,
    DataLengthMismatch,
    Conflict,
    BadBlock,
    BadConfig,
    InitialDensity,
  };

  ModelError(Kind kind, const std::string& message);
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

/// The cycle found during graph construction, in edge order.
class CycleDetected : public ModelError {
public:
  explicit CycleDetected(std::vector<std::string> cycle);
  const std::vector<std::string>& cycle() const { return cycle_; }

private:
  std::vector<std::string> cycle_;
};

class IoError : public Error {
public:
  enum class Kind {
    FileNotFound,
    Parse,
    RaggedRows,
    BadMagic,
    UnsupportedVersion,
    TruncatedRow,
    Write,
    NonFinite,
  };

  IoError(Kind kind, const std::string& message, std::size_t line = 0);
  Kind kind() const { return kind_; }
  /// 1-based line for text formats, 0 when not applicable.
  std::size_t line() const { return line_; }

private:
  Kind kind_;
  std::size_t line_;
};

}  // namespace dagmc
