#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dagmc/linalg.hpp"
#include "dagmc/model.hpp"

namespace testing {

std::filesystem::path source_dir();
std::filesystem::path models_dir();

/// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& tag);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

/// Random SPD matrix A A^T + d I.
dagmc::linalg::SymmetricMatrix random_spd(std::size_t d, std::mt19937_64& rng);
dagmc::linalg::LowerTriangular random_lower(std::size_t d, std::mt19937_64& rng);

double max_abs(const std::vector<double>& v);
/// max |a - b| / max(1, max |b|) over entries.
double rel_diff(std::span<const double> a, std::span<const double> b);

/// Graph of one free scalar x with the given custom log-density in `x_`.
dagmc::Graph single_node_graph(const std::string& log_density, double init = 0.0);

/// Random DAG of 1 to 8 scalar or vector nodes with builtin and custom
/// densities, some observed, some parents unread.
dagmc::Graph random_dag(std::mt19937_64& rng);

/// Scalar components of stochastic and observed nodes.
std::size_t random_variable_count(const dagmc::Graph& g);

/// Kolmogorov-Smirnov distance between samples and a CDF.
template <typename Cdf>
double ks_distance(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

}  // namespace testing

#include "dagmc/proposals.hpp"

namespace testing {

/// Two-stage delayed-rejection kernel assembled on a 101-point grid over
/// [-5, 5] targeting a discretised standard Gaussian; stage-one steps are
/// `scale` grid units times q0, stage two `gamma * scale`. Returns the total
/// variation distance between pi P and pi.
double dr_grid_tv(const dagmc::ProposalKind& kind, double scale, double gamma);

}  // namespace testing
