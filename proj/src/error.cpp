#include "dagmc/error.hpp"

namespace dagmc {

namespace {

std::string join_cycle(const std::vector<std::string>& cycle) {
  std::string out;
  for (const auto& name : cycle) {
    if (!out.empty()) out += " -> ";
    out += name;
  }
  return out;
}

}  // namespace

NotPositiveDefinite::NotPositiveDefinite(std::size_t pivot, double value)
    : Error("matrix is not positive definite (pivot " + std::to_string(pivot) +
            " = " + std::to_string(value) + ")"),
      pivot_(pivot) {}

UnknownDensity::UnknownDensity(const std::string& name)
    : Error("unknown density: " + name) {}

UnboundIdentifier::UnboundIdentifier(const std::string& name)
    : EvaluationError("unbound identifier: " + name) {}

SyntaxError::SyntaxError(const std::string& message, int line, int column)
    : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      message_(message),
      line_(line),
      column_(column) {}

ModelError::ModelError(Kind kind, const std::string& message)
    : Error(message), kind_(kind) {}

CycleDetected::CycleDetected(std::vector<std::string> cycle)
    : ModelError(Kind::CycleDetected, "cycle detected: " + join_cycle(cycle)),
      cycle_(std::move(cycle)) {}

IoError::IoError(Kind kind, const std::string& message, std::size_t line)
    : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      kind_(kind),
      line_(line) {}

}  // namespace dagmc
