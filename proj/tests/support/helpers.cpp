#include "helpers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "dagmc/expr.hpp"

namespace testing {

std::filesystem::path source_dir() { return DAGMC_SOURCE_DIR; }
std::filesystem::path models_dir() { return source_dir() / "models"; }

std::filesystem::path temp_dir(const std::string& tag) {
  static std::uint64_t counter = 0;
  auto dir = std::filesystem::temp_directory_path() /
             ("dagmc_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

dagmc::linalg::SymmetricMatrix random_spd(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  std::vector<double> a(d * d);
  for (auto& x : a) x = n01(rng);
  dagmc::linalg::SymmetricMatrix c(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = i == j ? static_cast<double>(d) : 0.0;
      for (std::size_t k = 0; k < d; ++k) s += a[i * d + k] * a[j * d + k];
      c.set(i, j, s);
    }
  }
  return c;
}

dagmc::linalg::LowerTriangular random_lower(std::size_t d, std::mt19937_64& rng) {
  return dagmc::linalg::chol_factor(random_spd(d, rng));
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double rel_diff(std::span<const double> a, std::span<const double> b) {
  double scale = 1.0;
  for (double x : b) scale = std::max(scale, std::abs(x));
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m / scale;
}

dagmc::Graph single_node_graph(const std::string& log_density, double init) {
  dagmc::NodeDecl d;
  d.name = "x";
  d.density = dagmc::DensityRef::make_custom(dagmc::lang::parse_expr(log_density));
  d.init_val = std::vector<double>{init};
  return dagmc::Graph::build({d});
}

}  // namespace testing

#include "dagmc/sampler.hpp"

namespace testing {

double dr_grid_tv(const dagmc::ProposalKind& kind, double scale, double gamma) {
  constexpr int kPoints = 101;
  constexpr int kReach = 400;
  const double neg_inf = -std::numeric_limits<double>::infinity();

  std::vector<double> log_pi(kPoints);
  std::vector<double> pi(kPoints);
  double z = 0.0;
  for (int i = 0; i < kPoints; ++i) {
    const double x = -5.0 + 0.1 * i;
    log_pi[i] = -0.5 * x * x;
    pi[i] = std::exp(log_pi[i]);
    z += pi[i];
  }
  for (auto& p : pi) p /= z;
  for (auto& l : log_pi) l -= std::log(z);
  auto lp = [&](int i) { return i < 0 || i >= kPoints ? neg_inf : log_pi[i]; };

  // Offset weights, normalised over [-kReach, kReach].
  auto table = [&](double s) {
    std::vector<double> w(2 * kReach + 1);
    double total = 0.0;
    for (int k = -kReach; k <= kReach; ++k) {
      const double u = static_cast<double>(k) / s;
      w[k + kReach] = std::exp(dagmc::log_density_standard(kind, std::span<const double>(&u, 1)));
      total += w[k + kReach];
    }
    for (auto& x : w) x /= total;
    return w;
  };
  const auto q1 = table(scale);
  const auto q2 = table(gamma * scale);
  auto log_q1 = [&](int from, int to) {
    const int k = to - from;
    if (k < -kReach || k > kReach) return neg_inf;
    return std::log(q1[k + kReach]);
  };

  std::vector<double> out(kPoints, 0.0);
  for (int i = 0; i < kPoints; ++i) {
    std::vector<double> row(kPoints, 0.0);
    for (int k = -kReach; k <= kReach; ++k) {
      const int y1 = i + k;
      const double w1 = q1[k + kReach];
      const double a1 = std::min(1.0, std::exp(lp(y1) - lp(i)));
      if (y1 >= 0 && y1 < kPoints) row[y1] += w1 * a1;
      const double reject1 = w1 * (1.0 - a1);
      if (reject1 == 0.0) continue;
      for (int j = 0; j < kPoints; ++j) {
        const int k2 = j - i;
        if (k2 < -kReach || k2 > kReach) continue;
        const double la2 = dagmc::dr_log_accept(lp(i), lp(y1), lp(j), log_q1(j, y1), log_q1(i, y1));
        row[j] += reject1 * q2[k2 + kReach] * std::exp(la2);
      }
    }
    double moved = 0.0;
    for (int j = 0; j < kPoints; ++j) {
      if (j != i) moved += row[j];
    }
    row[i] = 1.0 - moved;
    for (int j = 0; j < kPoints; ++j) out[j] += pi[i] * row[j];
  }
  double tv = 0.0;
  for (int j = 0; j < kPoints; ++j) tv += std::abs(out[j] - pi[j]);
  return 0.5 * tv;
}

std::size_t random_variable_count(const dagmc::Graph& g) {
  std::size_t n = 0;
  for (const auto& node : g.nodes()) {
    if (node.kind != dagmc::NodeKind::constant) n += node.dim;
  }
  return n;
}

/// Random DAG over scalar and vector nodes with builtin and custom densities.
dagmc::Graph random_dag(std::mt19937_64& rng) {
  using namespace dagmc;
  using lang::parse_expr;
  std::uniform_int_distribution<int> n_nodes(1, 8);
  std::uniform_real_distribution<double> u01;
  const int n = n_nodes(rng);
  std::vector<NodeDecl> decls;
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) {
    const std::string name = "n" + std::to_string(i);
    std::vector<std::string> parents;
    for (const auto& p : names) {
      if (u01(rng) < 0.4) parents.push_back(p);
    }
    std::string mean = "0";
    std::string var = "1";
    for (const auto& p : parents) {
      mean += " + " + std::to_string(0.5 - u01(rng)) + " * sum(" + p + ")";
      var += " + 0.1 * sum(" + p + ")^2";
    }
    NodeDecl d;
    d.name = name;
    const double kind = u01(rng);
    if (kind < 0.5) {
      d.density = DensityRef::make_builtin("dnorm", {parse_expr(mean), parse_expr(var)});
    } else if (kind < 0.8) {
      d.dim = 1 + static_cast<std::size_t>(u01(rng) * 3);
      d.density = DensityRef::make_custom(
          parse_expr("dnorm(" + name + "_, " + mean + ", " + var + ") - 0.1 * sum(" + name + "_)^4"));
    } else {
      // Declared parents that the density never reads.
      d.density = DensityRef::make_builtin("dnorm", {parse_expr("0"), parse_expr("2")});
      d.parents = parents;
    }
    if (u01(rng) < 0.25 && i > 0) {
      d.kind = NodeKind::observed;
      d.value = std::vector<double>(d.dim, u01(rng) - 0.5);
    }
    decls.push_back(d);
    names.push_back(name);
  }
  return Graph::build(decls);
}

}  // namespace testing
