#include "dagmc/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "dagmc/densities.hpp"
#include "dagmc/error.hpp"
#include "lexer.hpp"

namespace dagmc::lang {

struct Expr::Node {
  Kind kind;
  double value = 0.0;
  std::string name;
  BinaryOp op = BinaryOp::add;
  std::vector<Expr> children;
};

std::string_view op_symbol(BinaryOp op) {
  switch (op) {
    case BinaryOp::add: return "+";
    case BinaryOp::sub: return "-";
    case BinaryOp::mul: return "*";
    case BinaryOp::div: return "/";
    case BinaryOp::pow: return "^";
    case BinaryOp::lt: return "<";
    case BinaryOp::le: return "<=";
    case BinaryOp::gt: return ">";
    case BinaryOp::ge: return ">=";
    case BinaryOp::eq: return "==";
    case BinaryOp::ne: return "~=";
  }
  return "?";
}

Expr Expr::number(double value) {
  return Expr(std::make_shared<const Node>(Node{Kind::number, value, {}, BinaryOp::add, {}}));
}

Expr Expr::identifier(std::string name) {
  return Expr(std::make_shared<const Node>(Node{Kind::identifier, 0.0, std::move(name), {}, {}}));
}

Expr Expr::negate(Expr operand) {
  return Expr(std::make_shared<const Node>(Node{Kind::negate, 0.0, {}, {}, {std::move(operand)}}));
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
  return Expr(std::make_shared<const Node>(
      Node{Kind::binary, 0.0, {}, op, {std::move(lhs), std::move(rhs)}}));
}

Expr Expr::conditional(Expr cond, Expr then_branch, Expr else_branch) {
  return Expr(std::make_shared<const Node>(
      Node{Kind::conditional, 0.0, {}, {},
           {std::move(cond), std::move(then_branch), std::move(else_branch)}}));
}

Expr Expr::call(std::string function, std::vector<Expr> args) {
  return Expr(
      std::make_shared<const Node>(Node{Kind::call, 0.0, std::move(function), {}, std::move(args)}));
}

Expr Expr::vector(std::vector<Expr> elements) {
  return Expr(std::make_shared<const Node>(Node{Kind::vector, 0.0, {}, {}, std::move(elements)}));
}

Expr Expr::index(std::string name, Expr position) {
  return Expr(std::make_shared<const Node>(
      Node{Kind::index, 0.0, std::move(name), {}, {std::move(position)}}));
}

Expr::Kind Expr::kind() const { return node_->kind; }
double Expr::value() const { return node_->value; }
const std::string& Expr::name() const { return node_->name; }
BinaryOp Expr::op() const { return node_->op; }
const std::vector<Expr>& Expr::children() const { return node_->children; }

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case Expr::Kind::number:
      return x.value == y.value || (std::isnan(x.value) && std::isnan(y.value));
    case Expr::Kind::identifier: return x.name == y.name;
    case Expr::Kind::binary:
      if (x.op != y.op) return false;
      break;
    case Expr::Kind::call:
    case Expr::Kind::index:
      if (x.name != y.name) return false;
      break;
    default: break;
  }
  return x.children == y.children;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

constexpr int kPrecConditional = 0;
constexpr int kPrecComparison = 1;
constexpr int kPrecAdditive = 2;
constexpr int kPrecMultiplicative = 3;
constexpr int kPrecUnary = 4;
constexpr int kPrecPower = 5;
constexpr int kPrecPrimary = 6;

int precedence(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::conditional: return kPrecConditional;
    case Expr::Kind::negate: return kPrecUnary;
    case Expr::Kind::number: return e.value() < 0.0 ? kPrecUnary : kPrecPrimary;
    case Expr::Kind::binary:
      switch (e.op()) {
        case BinaryOp::add:
        case BinaryOp::sub: return kPrecAdditive;
        case BinaryOp::mul:
        case BinaryOp::div: return kPrecMultiplicative;
        case BinaryOp::pow: return kPrecPower;
        default: return kPrecComparison;
      }
    default: return kPrecPrimary;
  }
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void print(const Expr& e, std::string& out);

void print_at(const Expr& e, int min_prec, std::string& out) {
  if (precedence(e) < min_prec) {
    out += '(';
    print(e, out);
    out += ')';
  } else {
    print(e, out);
  }
}

void print_list(const std::vector<Expr>& items, std::string& out) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ", ";
    print(items[i], out);
  }
}

void print(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case Expr::Kind::number:
      if (e.value() < 0.0) {
        out += "(" + format_number(e.value()) + ")";
      } else {
        out += format_number(e.value());
      }
      break;
    case Expr::Kind::identifier: out += e.name(); break;
    case Expr::Kind::negate:
      out += '-';
      print_at(e.children()[0], kPrecUnary, out);
      break;
    case Expr::Kind::binary: {
      const int p = precedence(e);
      const bool right_assoc = e.op() == BinaryOp::pow;
      print_at(e.children()[0], right_assoc ? kPrecPrimary : p, out);
      out += ' ';
      out += op_symbol(e.op());
      out += ' ';
      print_at(e.children()[1], right_assoc ? kPrecUnary : p + 1, out);
      break;
    }
    case Expr::Kind::conditional:
      out += "if ";
      print(e.children()[0], out);
      out += " then ";
      print(e.children()[1], out);
      out += " else ";
      print(e.children()[2], out);
      break;
    case Expr::Kind::call:
      out += e.name();
      out += '(';
      print_list(e.children(), out);
      out += ')';
      break;
    case Expr::Kind::vector:
      out += '[';
      print_list(e.children(), out);
      out += ']';
      break;
    case Expr::Kind::index:
      out += e.name();
      out += '[';
      print(e.children()[0], out);
      out += ']';
      break;
  }
}

void collect_names(const Expr& e, std::vector<std::string>& out) {
  if (e.kind() == Expr::Kind::identifier || e.kind() == Expr::Kind::index) {
    if (std::find(out.begin(), out.end(), e.name()) == out.end()) out.push_back(e.name());
  }
  for (const auto& child : e.children()) collect_names(child, out);
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

Expr parse_expr(std::string_view text) {
  detail::TokenStream ts(detail::tokenize(text));
  Expr e = ts.parse_expression();
  if (!ts.at(detail::Tok::end)) ts.fail("unexpected " + detail::describe(ts.peek()));
  return e;
}

std::vector<std::string> referenced_names(const Expr& e) {
  std::vector<std::string> out;
  collect_names(e, out);
  return out;
}

Expr rename_variables(const Expr& e,
                      const std::function<std::optional<std::string>(const std::string&)>& rename) {
  std::vector<Expr> kids;
  kids.reserve(e.children().size());
  for (const auto& child : e.children()) kids.push_back(rename_variables(child, rename));
  switch (e.kind()) {
    case Expr::Kind::number: return e;
    case Expr::Kind::identifier: {
      auto renamed = rename(e.name());
      return renamed ? Expr::identifier(*renamed) : e;
    }
    case Expr::Kind::index: {
      auto renamed = rename(e.name());
      return Expr::index(renamed ? *renamed : e.name(), kids[0]);
    }
    case Expr::Kind::negate: return Expr::negate(kids[0]);
    case Expr::Kind::binary: return Expr::binary(e.op(), kids[0], kids[1]);
    case Expr::Kind::conditional: return Expr::conditional(kids[0], kids[1], kids[2]);
    case Expr::Kind::call: return Expr::call(e.name(), std::move(kids));
    case Expr::Kind::vector: return Expr::vector(std::move(kids));
  }
  return e;
}

// ---------------------------------------------------------------------------
// Values

Value Value::vector(std::vector<double> elements) {
  Value v;
  v.elems_ = std::move(elements);
  v.vector_ = true;
  return v;
}

double Value::scalar() const {
  if (vector_) {
    throw EvaluationError("expected a scalar, got a vector of length " +
                          std::to_string(elems_.size()));
  }
  return scalar_;
}

bool operator==(const Value& a, const Value& b) {
  if (a.vector_ != b.vector_) return false;
  const auto x = a.elements();
  const auto y = b.elements();
  return std::equal(x.begin(), x.end(), y.begin(), y.end());
}

// ---------------------------------------------------------------------------
// Compilation and evaluation

namespace {

enum class MathFn { exp, log, sqrt, abs, min, max, pow, sum, length };

struct MathSpec {
  std::string_view name;
  MathFn fn;
  std::size_t min_args;
  std::size_t max_args;
};

constexpr MathSpec kMath[] = {
    {"exp", MathFn::exp, 1, 1},       {"log", MathFn::log, 1, 1},
    {"sqrt", MathFn::sqrt, 1, 1},     {"abs", MathFn::abs, 1, 1},
    {"min", MathFn::min, 1, SIZE_MAX}, {"max", MathFn::max, 1, SIZE_MAX},
    {"pow", MathFn::pow, 2, 2},       {"sum", MathFn::sum, 1, 1},
    {"length", MathFn::length, 1, 1},
};

}  // namespace

struct CompiledExpr::Node {
  enum class Op { number, slot, negate, binary, conditional, math, density, vector, index };
  Op op = Op::number;
  double number = 0.0;
  Slot slot{0, 0, false};
  BinaryOp binop = BinaryOp::add;
  MathFn fn = MathFn::exp;
  const BuiltinDensity* density = nullptr;
  std::vector<Node> kids;
};

namespace {

using CNode = CompiledExpr::Node;

CNode compile_node(const Expr& e, const Resolver& resolve) {
  CNode n;
  switch (e.kind()) {
    case Expr::Kind::number:
      n.number = e.value();
      return n;
    case Expr::Kind::identifier:
    case Expr::Kind::index: {
      auto slot = resolve(e.name());
      if (!slot) throw UnboundIdentifier(e.name());
      n.slot = *slot;
      n.op = e.kind() == Expr::Kind::identifier ? CNode::Op::slot : CNode::Op::index;
      break;
    }
    case Expr::Kind::negate: n.op = CNode::Op::negate; break;
    case Expr::Kind::binary:
      n.op = CNode::Op::binary;
      n.binop = e.op();
      break;
    case Expr::Kind::conditional: n.op = CNode::Op::conditional; break;
    case Expr::Kind::vector: n.op = CNode::Op::vector; break;
    case Expr::Kind::call: {
      const auto nargs = e.children().size();
      if (const auto* d = find_builtin(e.name())) {
        if (nargs != d->arity + 1) {
          throw BadArity(e.name() + " expects " + std::to_string(d->arity + 1) +
                         " arguments, got " + std::to_string(nargs));
        }
        n.op = CNode::Op::density;
        n.density = d;
        break;
      }
      const auto* spec = std::find_if(std::begin(kMath), std::end(kMath),
                                      [&](const MathSpec& m) { return m.name == e.name(); });
      if (spec == std::end(kMath)) throw EvaluationError("unknown function: " + e.name());
      if (nargs < spec->min_args || nargs > spec->max_args) {
        throw BadArity(e.name() + ": wrong number of arguments (" + std::to_string(nargs) + ")");
      }
      n.op = CNode::Op::math;
      n.fn = spec->fn;
      break;
    }
  }
  for (const auto& child : e.children()) n.kids.push_back(compile_node(child, resolve));
  return n;
}

double checked(double v, const char* what) {
  if (std::isnan(v)) throw DomainError(std::string("undefined result in ") + what);
  return v;
}

double apply_binary(BinaryOp op, double a, double b) {
  switch (op) {
    case BinaryOp::add: return checked(a + b, "addition");
    case BinaryOp::sub: return checked(a - b, "subtraction");
    case BinaryOp::mul: return checked(a * b, "multiplication");
    case BinaryOp::div:
      if (b == 0.0) throw DomainError("division by zero");
      return checked(a / b, "division");
    case BinaryOp::pow: return checked(std::pow(a, b), "power");
    case BinaryOp::lt: return a < b ? 1.0 : 0.0;
    case BinaryOp::le: return a <= b ? 1.0 : 0.0;
    case BinaryOp::gt: return a > b ? 1.0 : 0.0;
    case BinaryOp::ge: return a >= b ? 1.0 : 0.0;
    case BinaryOp::eq: return a == b ? 1.0 : 0.0;
    case BinaryOp::ne: return a != b ? 1.0 : 0.0;
  }
  return 0.0;
}

bool is_comparison(BinaryOp op) {
  return op != BinaryOp::add && op != BinaryOp::sub && op != BinaryOp::mul &&
         op != BinaryOp::div && op != BinaryOp::pow;
}

double apply_unary(MathFn fn, double x) {
  switch (fn) {
    case MathFn::exp: return std::exp(x);
    case MathFn::log:
      if (x < 0.0) throw DomainError("log of a negative number");
      return std::log(x);
    case MathFn::sqrt:
      if (x < 0.0) throw DomainError("sqrt of a negative number");
      return std::sqrt(x);
    case MathFn::abs: return std::abs(x);
    default: return checked(std::numeric_limits<double>::quiet_NaN(), "function");
  }
}

Value eval_node(const CNode& n, std::span<const double> frame);

Value elementwise(const Value& a, const Value& b, BinaryOp op) {
  if (!a.is_vector() && !b.is_vector()) return apply_binary(op, a.scalar(), b.scalar());
  if (is_comparison(op)) throw EvaluationError("comparison of vectors");
  const auto x = a.elements();
  const auto y = b.elements();
  if (a.is_vector() && b.is_vector() && x.size() != y.size()) {
    throw EvaluationError("vector length mismatch: " + std::to_string(x.size()) + " vs " +
                          std::to_string(y.size()));
  }
  const std::size_t len = std::max(x.size(), y.size());
  std::vector<double> out(len);
  for (std::size_t i = 0; i < len; ++i) {
    out[i] = apply_binary(op, a.is_vector() ? x[i] : x[0], b.is_vector() ? y[i] : y[0]);
  }
  return Value::vector(std::move(out));
}

Value eval_math(const CNode& n, std::span<const double> frame) {
  switch (n.fn) {
    case MathFn::min:
    case MathFn::max: {
      const bool is_min = n.fn == MathFn::min;
      double best = is_min ? std::numeric_limits<double>::infinity()
                           : -std::numeric_limits<double>::infinity();
      for (const auto& kid : n.kids) {
        const Value v = eval_node(kid, frame);
        for (double x : v.elements()) best = is_min ? std::min(best, x) : std::max(best, x);
      }
      return best;
    }
    case MathFn::pow:
      return elementwise(eval_node(n.kids[0], frame), eval_node(n.kids[1], frame), BinaryOp::pow);
    case MathFn::sum: {
      const Value v = eval_node(n.kids[0], frame);
      double s = 0.0;
      for (double x : v.elements()) s += x;
      return s;
    }
    case MathFn::length: return static_cast<double>(eval_node(n.kids[0], frame).size());
    default: {
      const Value v = eval_node(n.kids[0], frame);
      if (!v.is_vector()) return apply_unary(n.fn, v.scalar());
      std::vector<double> out;
      out.reserve(v.size());
      for (double x : v.elements()) out.push_back(apply_unary(n.fn, x));
      return Value::vector(std::move(out));
    }
  }
}

Value eval_density(const CNode& n, std::span<const double> frame) {
  const BuiltinDensity& d = *n.density;
  const Value x = eval_node(n.kids[0], frame);
  double params_buf[4];
  if (d.arity == 0) {
    double total = 0.0;
    for (double xi : x.elements()) total += d.log_density(xi, {});
    return total;
  }
  // Parameters broadcast against x elementwise.
  std::vector<Value> params;
  params.reserve(d.arity);
  for (std::size_t k = 0; k < d.arity; ++k) {
    params.push_back(eval_node(n.kids[k + 1], frame));
    if (params.back().is_vector() && params.back().size() != x.size()) {
      throw EvaluationError(std::string(d.name) + ": parameter length does not match argument");
    }
  }
  const auto xs = x.elements();
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t k = 0; k < d.arity; ++k) {
      const auto p = params[k].elements();
      params_buf[k] = params[k].is_vector() ? p[i] : p[0];
    }
    total += d.log_density(xs[i], std::span<const double>(params_buf, d.arity));
  }
  return total;
}

Value eval_node(const CNode& n, std::span<const double> frame) {
  switch (n.op) {
    case CNode::Op::number: return n.number;
    case CNode::Op::slot:
      if (!n.slot.is_vector) return frame[n.slot.offset];
      return Value::vector(std::vector<double>(frame.begin() + n.slot.offset,
                                               frame.begin() + n.slot.offset + n.slot.length));
    case CNode::Op::index: {
      const double pos = eval_node(n.kids[0], frame).scalar();
      if (pos != std::floor(pos) || pos < 1.0 || pos > static_cast<double>(n.slot.length)) {
        throw DomainError("index " + format_number(pos) + " out of range 1.." +
                              std::to_string(n.slot.length));
      }
      return frame[n.slot.offset + static_cast<std::size_t>(pos) - 1];
    }
    case CNode::Op::negate: {
      const Value v = eval_node(n.kids[0], frame);
      if (!v.is_vector()) return -v.scalar();
      std::vector<double> out(v.elements().begin(), v.elements().end());
      for (auto& x : out) x = -x;
      return Value::vector(std::move(out));
    }
    case CNode::Op::binary:
      return elementwise(eval_node(n.kids[0], frame), eval_node(n.kids[1], frame), n.binop);
    case CNode::Op::conditional: {
      const double c = eval_node(n.kids[0], frame).scalar();
      return eval_node(c != 0.0 ? n.kids[1] : n.kids[2], frame);
    }
    case CNode::Op::math: return eval_math(n, frame);
    case CNode::Op::density: return eval_density(n, frame);
    case CNode::Op::vector: {
      std::vector<double> out;
      for (const auto& kid : n.kids) {
        const Value v = eval_node(kid, frame);
        out.insert(out.end(), v.elements().begin(), v.elements().end());
      }
      return Value::vector(std::move(out));
    }
  }
  return 0.0;
}

}  // namespace

CompiledExpr CompiledExpr::compile(const Expr& e, const Resolver& resolve) {
  CompiledExpr out;
  out.root_ = std::make_shared<const Node>(compile_node(e, resolve));
  out.source_ = e;
  return out;
}

Value CompiledExpr::eval(std::span<const double> frame) const { return eval_node(*root_, frame); }

Value eval_expr(const Expr& e, const std::map<std::string, Value, std::less<>>& env) {
  std::vector<double> frame;
  std::map<std::string, Slot, std::less<>> slots;
  for (const auto& [name, value] : env) {
    slots[name] = Slot{frame.size(), value.size(), value.is_vector()};
    frame.insert(frame.end(), value.elements().begin(), value.elements().end());
  }
  const auto compiled = CompiledExpr::compile(e, [&](const std::string& name) -> std::optional<Slot> {
    const auto it = slots.find(name);
    if (it == slots.end()) return std::nullopt;
    return it->second;
  });
  return compiled.eval(frame);
}

}  // namespace dagmc::lang
