#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dagmc {

/// Post-burn-in statistics of one block.
struct BlockReport {
  std::string name;
  std::uint64_t attempts = 0;
  std::uint64_t accepted_first = 0;
  std::uint64_t accepted_delayed = 0;
  double theta = 0.0;
  /// Final shape factor L, row-major.
  std::vector<double> shape;

  double rate_total() const { return rate(accepted_first + accepted_delayed); }
  double rate_first() const { return rate(accepted_first); }
  double rate_delayed() const { return rate(accepted_delayed); }

private:
  double rate(std::uint64_t n) const {
    return attempts == 0 ? 0.0 : static_cast<double>(n) / static_cast<double>(attempts);
  }
};

struct RunReport {
  std::optional<std::vector<double>> functional_average;
  std::uint64_t functional_samples = 0;
  std::vector<BlockReport> blocks;
  bool delayed_rejection = false;
  std::uint64_t sweeps = 0;
  double seconds = 0.0;
  std::vector<std::string> warnings;
};

}  // namespace dagmc
