#pragma once

// Expression sub-language shared by densities, functionals, scaling rules
// and mixing sequences.
//
// Precedence, high to low: postfix [i] and calls, ^ (right assoc), unary -,
// * /, + -, comparisons, if-then-else. Vector literals are [e1, ..., ek];
// components are 1-based.

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dagmc::lang {

enum class BinaryOp { add, sub, mul, div, pow, lt, le, gt, ge, eq, ne };

std::string_view op_symbol(BinaryOp op);

/// Immutable expression tree with value semantics (children are shared).
class Expr {
public:
  enum class Kind { number, identifier, negate, binary, conditional, call, vector, index };

  static Expr number(double value);
  static Expr identifier(std::string name);
  static Expr negate(Expr operand);
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs);
  static Expr conditional(Expr cond, Expr then_branch, Expr else_branch);
  static Expr call(std::string function, std::vector<Expr> args);
  static Expr vector(std::vector<Expr> elements);
  static Expr index(std::string name, Expr position);

  Kind kind() const;
  double value() const;
  /// Identifier, function or indexed variable name.
  const std::string& name() const;
  BinaryOp op() const;
  const std::vector<Expr>& children() const;

  friend bool operator==(const Expr& a, const Expr& b);

private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Canonical text form; parse_expr(to_string(e)) == e.
std::string to_string(const Expr& e);

/// Throws SyntaxError with the 1-based line/column of the offending token.
Expr parse_expr(std::string_view text);

/// Variable names referenced by `e` (identifiers and indexed names), in
/// order of first appearance. Function names are not included.
std::vector<std::string> referenced_names(const Expr& e);

/// Copy of `e` with variable names mapped through `rename` (unchanged when it
/// returns nullopt).
Expr rename_variables(const Expr& e,
                      const std::function<std::optional<std::string>(const std::string&)>& rename);

/// Scalar or vector result of an evaluation.
class Value {
public:
  Value(double x = 0.0) : scalar_(x) {}  // NOLINT(google-explicit-constructor)
  static Value vector(std::vector<double> elements);

  bool is_vector() const { return vector_; }
  std::size_t size() const { return vector_ ? elems_.size() : 1; }
  /// Throws EvaluationError for vectors.
  double scalar() const;
  std::span<const double> elements() const {
    return vector_ ? std::span<const double>(elems_) : std::span<const double>(&scalar_, 1);
  }

  friend bool operator==(const Value& a, const Value& b);

private:
  double scalar_ = 0.0;
  std::vector<double> elems_;
  bool vector_ = false;
};

/// Location of a variable inside an evaluation frame.
struct Slot {
  std::size_t offset;
  std::size_t length;
  bool is_vector;
};

using Resolver = std::function<std::optional<Slot>(const std::string&)>;

/// Expression with identifiers resolved to frame slots and functions bound.
class CompiledExpr {
public:
  /// Throws UnboundIdentifier, EvaluationError (unknown function) or BadArity.
  static CompiledExpr compile(const Expr& e, const Resolver& resolve);

  /// Evaluates against `frame`. Untaken conditional branches are not
  /// evaluated. Throws DomainError for undefined arithmetic (log of a
  /// negative number, division by zero, NaN results).
  Value eval(std::span<const double> frame) const;

  const Expr& source() const { return source_; }

  struct Node;

private:
  std::shared_ptr<const Node> root_;
  Expr source_ = Expr::number(0.0);
};

/// Convenience evaluation against a name -> value environment.
Value eval_expr(const Expr& e, const std::map<std::string, Value, std::less<>>& env);

}  // namespace dagmc::lang
