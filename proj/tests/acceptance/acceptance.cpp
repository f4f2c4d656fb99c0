// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--allow-fail ID]... [--only ID]...
//
// Exit status is 0 when every criterion passes or fails only among the
// allowed IDs.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dagmc/adapt.hpp"
#include "dagmc/cli.hpp"
#include "dagmc/error.hpp"
#include "dagmc/io.hpp"
#include "dagmc/linalg.hpp"
#include "dagmc/modelang.hpp"
#include "dagmc/sampler.hpp"
#include "helpers.hpp"

using namespace dagmc;

namespace {

const std::vector<double> kTarget{0.3925, 0.2674, 0.3189};

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

LoadedModel baseball(std::vector<std::filesystem::path> extra = {},
                     std::vector<std::string> fragments = {}) {
  CliArgs args;
  args.model_paths = {testing::models_dir() / "baseball.model"};
  for (auto& p : extra) args.model_paths.push_back(p);
  args.inline_overrides = std::move(fragments);
  return load_model(load_model_files(args));
}

const BlockReport& block(const RunReport& r, const std::string& name) {
  for (const auto& b : r.blocks) {
    if (b.name == name) return b;
  }
  throw std::runtime_error("no block " + name);
}

Verdict baseball_reproduction() {
  Verdict v;
  const LoadedModel m = baseball();
  const auto reports = run_chains(m, 10);
  int within = 0;
  double worst_rate = 0.0;
  for (const auto& r : reports) {
    bool ok = true;
    for (std::size_t k = 0; k < 3; ++k) {
      ok = ok && std::abs((*r.functional_average)[k] - kTarget[k]) <= 0.02;
    }
    within += ok ? 1 : 0;
    const double rate = block(r, "a").rate_total();
    if (std::abs(rate - 0.44) > std::abs(worst_rate - 0.44)) worst_rate = rate;
  }
  if (worst_rate == 0.0) worst_rate = block(reports.front(), "a").rate_total();
  v.require(within >= 9, "only " + std::to_string(within) + "/10 seeds within 0.02");
  v.require(std::abs(worst_rate - 0.44) <= 0.02, fmt("a-block rate %.2f%%", 100 * worst_rate));
  const auto& avg = *reports.front().functional_average;
  v.note(std::to_string(within) + "/10 seeds within 0.02");
  v.note(fmt("seed 1 average [%.4f %.4f %.4f]", avg[0], avg[1], avg[2]));
  v.note(fmt("worst a-block rate %.2f%%", 100 * worst_rate));
  return v;
}

Verdict baseball_dr() {
  Verdict v;
  const LoadedModel m = baseball({testing::models_dir() / "amcmc_dr.model"});
  const RunReport r = run_chains(m, 1).front();
  const auto& a = block(r, "a");
  const double total = a.rate_total();
  const double share = a.rate_first() / total;
  v.require(std::abs(total - 0.70) <= 0.04, fmt("total a-block rate %.2f%%", 100 * total));
  v.require(share >= 0.55 && share <= 0.80, fmt("first-stage share %.1f%%", 100 * share));
  const auto& avg = *r.functional_average;
  for (std::size_t k = 0; k < 3; ++k) {
    v.require(std::abs(avg[k] - kTarget[k]) <= 0.03, fmt("average %zu off", k));
  }
  v.note(fmt("a: %.2f (%.2f + %.2f)", 100 * total, 100 * a.rate_first(), 100 * a.rate_delayed()));
  v.note(fmt("average [%.4f %.4f %.4f]", avg[0], avg[1], avg[2]));
  return v;
}

Verdict am_oracle() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1001);
  std::normal_distribution<double> n01;
  double worst_cov = 0.0;
  double worst_mean = 0.0;
  for (std::size_t d = 1; d <= 5; ++d) {
    std::vector<double> x0(d);
    for (auto& x : x0) x = n01(rng);
    auto st = AdaptState::initial(x0, 1.0);
    std::vector<double> mean = x0;
    std::vector<double> sum = x0;
    std::vector<double> cov(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) cov[i * d + i] = 1.0;
    for (std::uint64_t n = 1; n <= 1000; ++n) {
      std::vector<double> x(d);
      for (std::size_t i = 0; i < d; ++i) {
        x[i] = 2.0 * n01(rng) + static_cast<double>(i);
        sum[i] += x[i];
      }
      const double e = eta(WeightSchedule::reciprocal(), n);
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          cov[i * d + j] = (1 - e) * cov[i * d + j] + e * (x[i] - mean[i]) * (x[j] - mean[j]);
        }
      }
      for (std::size_t i = 0; i < d; ++i) mean[i] = (1 - e) * mean[i] + e * x[i];
      am_update_inplace(st, x, e);
    }
    worst_cov = std::max(worst_cov, testing::rel_diff(st.shape.gram().entries(), cov));
    for (std::size_t i = 0; i < d; ++i) {
      worst_mean = std::max(worst_mean, std::abs(st.mean[i] - sum[i] / 1001.0));
    }
  }
  const double secs = seconds_since(t0);
  v.require(worst_cov <= 1e-9, fmt("covariance rel diff %.3g", worst_cov));
  v.require(worst_mean <= 1e-12, fmt("mean diff %.3g", worst_mean));
  v.require(secs < 1.0, fmt("took %.2f s", secs));
  v.note(fmt("cov %.2g, mean %.2g, %.3f s", worst_cov, worst_mean, secs));
  return v;
}

Verdict rank_one() {
  Verdict v;
  std::mt19937_64 rng(1002);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> u01;
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t d = 1 + rep % 8;
    const auto c = testing::random_spd(d, rng);
    const auto l = linalg::chol_factor(c);
    const double beta = 0.05 + u01(rng);
    const double w = u01(rng);
    std::vector<double> x(d);
    for (auto& e : x) e = n01(rng);
    const auto updated = linalg::rank1_update(l, beta, w, x);
    linalg::SymmetricMatrix direct(d);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j <= i; ++j) direct.set(i, j, beta * c(i, j) + w * x[i] * x[j]);
    }
    worst = std::max(worst, testing::rel_diff(updated.entries(), linalg::chol_factor(direct).entries()));
  }
  v.require(worst <= 1e-9, fmt("rel diff %.3g", worst));

  // Least-squares slope of log(flops) against log(d).
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  double max_ratio = 0.0;
  for (std::size_t d = 2; d <= 32; ++d) {
    auto l = linalg::LowerTriangular::identity(d);
    std::vector<double> x(d);
    for (auto& e : x) e = n01(rng);
    std::uint64_t flops = 0;
    linalg::rank1_update_inplace(l, 0.9, 0.1, x, &flops);
    const double lx = std::log(static_cast<double>(d));
    const double ly = std::log(static_cast<double>(flops));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
    max_ratio = std::max(max_ratio, static_cast<double>(flops) / static_cast<double>(d * d));
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  v.require(slope > 1.7 && slope < 2.2, fmt("flop growth exponent %.2f", slope));
  v.note(fmt("rel diff %.2g, flop exponent %.2f, max flops/d^2 %.1f", worst, slope, max_ratio));
  return v;
}

Verdict ascm() {
  Verdict v;
  v.require(ascm_update(1.0, 0.234, 0.1, 0.234) == 1.0, "fixed point");
  v.require(std::abs(ascm_update(2.0, 0.0, 0.5, 0.234) - 1.0) <= 1e-15, "alpha 0 halves");
  v.require(std::abs(ascm_update(1.0, 0.468, 0.1, 0.234) - 1.1) <= 1e-15, "alpha 2x target");

  RunConfig cfg;
  cfg.niter = 100000;
  cfg.seed = 1005;
  cfg.algorithm.covariance = CovarianceAdapt::none;
  cfg.algorithm.scaling = ScalingAdapt::ascm;
  const Graph g = testing::single_node_graph("-x_^2 / 2");
  ChainState chain(g.initial_values(), cfg.seed);
  std::vector<BlockPlan> plans{BlockPlan::make(g, g.default_blocks().front())};
  std::vector<BlockChain> states{BlockChain::make(plans.front(), chain.values, cfg)};
  double trailing = 0.0;
  for (std::uint64_t n = 1; n <= cfg.niter; ++n) {
    ++chain.iter;
    const auto out = sweep(g, chain, plans, states, cfg).front();
    if (n > 90000) trailing += out.accepted ? 1.0 : 0.0;
  }
  trailing /= 10000.0;
  v.require(std::abs(trailing - 0.44) <= 0.03, fmt("trailing acceptance %.4f", trailing));
  v.note(fmt("trailing acceptance %.4f", trailing));
  return v;
}

Verdict dr_invariance() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (auto fam : {ProposalFamily::gaussian, ProposalFamily::student, ProposalFamily::uniform_cube,
                   ProposalFamily::laplace_product}) {
    for (double gamma : {0.1, 0.5}) {
      worst = std::max(worst, testing::dr_grid_tv(ProposalKind(fam), 25.0, gamma));
    }
  }
  const double secs = seconds_since(t0);
  v.require(worst <= 1e-3, fmt("total variation %.3g", worst));
  v.require(secs < 10.0, fmt("took %.1f s", secs));
  v.note(fmt("max TV %.2g, %.2f s", worst, secs));
  return v;
}

Verdict markov_blanket() {
  Verdict v;
  std::mt19937_64 rng(1007);
  std::normal_distribution<double> n01;
  int graphs = 0;
  double worst = 0.0;
  while (graphs < 200) {
    const Graph g = testing::random_dag(rng);
    auto free = g.free_components();
    if (free.empty()) continue;
    ++graphs;
    std::shuffle(free.begin(), free.end(), rng);
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < free.size();) {
      const std::size_t len = 1 + std::uniform_int_distribution<std::size_t>(0, 2)(rng);
      Block b;
      for (std::size_t j = i; j < std::min(free.size(), i + len); ++j) b.members.push_back(free[j]);
      i += len;
      blocks.push_back(b);
    }
    NodeValues values = g.initial_values();
    for (const auto& c : g.free_components()) values.flat[g.flat_index(c)] = n01(rng);
    for (const auto& b : blocks) {
      std::vector<double> old_vals, new_vals;
      for (const auto& m : b.members) {
        old_vals.push_back(values.flat[g.flat_index(m)]);
        new_vals.push_back(n01(rng));
      }
      const double local = g.block_logdensity(values, b, new_vals) -
                           g.block_logdensity(values, b, old_vals);
      NodeValues moved = values;
      for (std::size_t k = 0; k < b.members.size(); ++k) {
        moved.flat[g.flat_index(b.members[k])] = new_vals[k];
      }
      const double full = g.log_joint(moved) - g.log_joint(values);
      const double err = std::abs(local - full) / std::max(1.0, std::abs(full));
      worst = std::max(worst, std::isnan(err) ? INFINITY : err);
      values = moved;
    }
  }
  v.require(worst <= 1e-12, fmt("relative difference %.3g", worst));
  v.note(fmt("200 DAGs, max relative difference %.2g", worst));
  return v;
}

Verdict parser_suite() {
  Verdict v;
  const auto mf = lang::parse_model_file(testing::models_dir() / "baseball.model");
  v.require(mf.nodes.size() == 4 && mf.consts.size() == 1, "baseball declarations");
  const LoadedModel m = load_model(mf);
  const std::size_t vars = testing::random_variable_count(m.graph);
  v.require(vars == 38, "random variable count " + std::to_string(vars));
  v.require(m.graph.free_components().size() == 20, "free component count");
  v.require(lang::parse_model(lang::to_string(mf), testing::models_dir()) == mf, "round trip");

  const std::vector<std::tuple<std::string, int, int>> errors{
      {"model = {\n  x = { density = }\n}", 2, 19},
      {"\n  bogus = 1", 2, 3},
      {"para = { niter = 10,\n nbrun = 3 }", 2, 2},
  };
  for (const auto& [text, line, col] : errors) {
    try {
      lang::parse_model(text);
      v.require(false, "no error for " + text);
    } catch (const SyntaxError& e) {
      v.require(e.line() == line && e.column() == col,
                "error position " + std::to_string(e.line()) + ":" + std::to_string(e.column()));
    }
  }

  const auto dr = lang::parse_model_file(testing::models_dir() / "amcmc_dr.model");
  const double rule = lang::make_run_config(dr).algorithm.user_rule(1.0, 0.5, 1, 9999);
  v.require(std::abs(rule - 1.0100502) <= 1e-6, fmt("rule value %.9f", rule));
  v.note(std::to_string(vars) + " random variables");
  v.note(fmt("rule value %.7f", rule));
  return v;
}

Verdict io_round_trips() {
  Verdict v;
  const auto dir = testing::temp_dir("acceptance_io");
  std::mt19937_64 rng(1009);
  std::uniform_int_distribution<std::uint64_t> bits;
  std::vector<std::vector<double>> rows(10000, std::vector<double>(6));
  for (auto& row : rows) {
    for (auto& x : row) {
      do {
        x = std::bit_cast<double>(bits(rng));
      } while (!std::isfinite(x));
    }
  }
  const std::vector<std::string> cols{"a", "b", "c[1]", "c[2]", "d", "e"};
  {
    io::BinaryTraceSink bin(dir / "t.bin", cols);
    io::CsvTraceSink csv(dir / "t.csv", cols);
    for (const auto& row : rows) {
      bin.write(row);
      csv.write(row);
    }
    bin.finalize();
    csv.finalize();
  }
  auto same = [&](const io::Table& t) {
    if (t.headers != cols || t.rows.size() != rows.size()) return false;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < cols.size(); ++c) {
        if (std::bit_cast<std::uint64_t>(t.rows[r][c]) != std::bit_cast<std::uint64_t>(rows[r][c])) {
          return false;
        }
      }
    }
    return true;
  };
  v.require(same(io::read_trace_binary(dir / "t.bin")), "binary round trip");
  v.require(same(io::read_csv(dir / "t.csv")), "CSV round trip");
  v.note("10000 random rows");
  return v;
}

Verdict reproducibility() {
  Verdict v;
  const auto dir = testing::temp_dir("acceptance_repro");
  auto trace = [&](const std::string& name, int seed) {
    const auto path = dir / name;
    const LoadedModel m =
        baseball({}, {"para.outfile = '" + path.string() + "'", "para.seed = " + std::to_string(seed)});
    run_chains(m, 1);
    return testing::read_file(path);
  };
  const std::string a = trace("a.bin", 11);
  const std::string b = trace("b.bin", 11);
  const std::string c = trace("c.bin", 12);
  v.require(!a.empty() && a == b, "repeated runs differ");
  v.require(a != c, "different seeds give identical traces");
  v.note(std::to_string(a.size()) + " bytes identical");
  return v;
}

Verdict performance() {
  Verdict v;
  const LoadedModel m = baseball();
  const auto t0 = std::chrono::steady_clock::now();
  const RunReport r = run_chains(m, 1).front();
  const double secs = seconds_since(t0);
  v.require(r.sweeps == 40000, "sweep count");
  v.require(secs < 5.0, fmt("took %.2f s", secs));
  v.note(fmt("40000 sweeps over %.0f blocks in %.2f s", static_cast<double>(m.blocks.size()), secs));
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::string> allowed;
  std::set<std::string> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if ((arg == "--allow-fail" || arg == "--only") && i + 1 < argc) {
      (arg == "--only" ? only : allowed).insert(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: acceptance [--allow-fail ID]... [--only ID]...\n");
      return 2;
    }
  }

  const std::vector<std::tuple<std::string, std::string, std::function<Verdict()>>> criteria{
      {"1", "baseball reproduction", baseball_reproduction},
      {"2", "baseball delayed rejection", baseball_dr},
      {"3", "AM oracle equivalence", am_oracle},
      {"4", "rank-one update", rank_one},
      {"5", "ASCM fixed point and convergence", ascm},
      {"6", "DR kernel invariance", dr_invariance},
      {"7", "Markov-blanket exactness", markov_blanket},
      {"8", "parser suite", parser_suite},
      {"9", "I/O round trips", io_round_trips},
      {"10", "reproducibility", reproducibility},
      {"perf", "performance gate", performance},
  };

  int unexpected = 0;
  for (const auto& [id, title, fn] : criteria) {
    if (!only.empty() && !only.contains(id)) continue;
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const bool excused = !v.pass && allowed.contains(id);
    std::printf("%s criterion %s: %s (%s)%s\n", v.pass ? "PASS" : "FAIL", id.c_str(), title.c_str(),
                v.detail.c_str(), excused ? " [allowed]" : "");
    std::fflush(stdout);
    if (!v.pass && !excused) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
