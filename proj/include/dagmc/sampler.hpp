#pragma once

// Metropolis-within-Gibbs driver: random-walk step, two-stage delayed
// rejection, mixture proposals, per-block adaptation and the run loop.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dagmc/adapt.hpp"
#include "dagmc/expr.hpp"
#include "dagmc/io.hpp"
#include "dagmc/model.hpp"
#include "dagmc/proposals.hpp"
#include "dagmc/report.hpp"

namespace dagmc {

struct RunConfig {
  std::uint64_t niter = 10000;
  std::uint64_t nburn = 0;
  std::uint64_t thin = 1;
  std::uint64_t seed = 1;
  AlgorithmChoice algorithm;
  BurninStrategy::Kind burnin = BurninStrategy::Kind::greedy;
  ProposalKind proposal;
  /// Second-stage scale gamma in (0,1); delayed rejection is off when unset.
  std::optional<double> dr_scale;
  MixSchedule mix;
  WeightSchedule covariance_weights;
  WeightSchedule scaling_weights;
  /// Initial scaling; 2.38/sqrt(d) per block when unset.
  std::optional<double> theta0;
  /// Index eta_n by the sweep number instead of the block's own update count.
  bool global_step_counter = false;
  std::optional<std::filesystem::path> outfile;

  BurninStrategy strategy() const { return {burnin, nburn}; }
  /// Throws ModelError(BadConfig).
  void validate() const;
};

struct ChainState {
  NodeValues values;
  std::uint64_t iter = 0;
  Rng rng;

  ChainState(NodeValues v, std::uint64_t seed) : values(std::move(v)), rng(seed) {}
};

enum class Stage { none, first, delayed };

struct StepOutcome {
  bool accepted = false;
  double alpha1 = 0.0;
  /// first after a single-stage step, delayed once the second stage ran.
  Stage stage = Stage::none;
  std::optional<double> alpha2;
};

/// A block with its precomputed Markov blanket.
struct BlockPlan {
  Block block;
  std::vector<NodeId> dependents;
  std::vector<std::size_t> flat;
  std::string name;

  static BlockPlan make(const Graph& graph, Block block);
};

/// Adaptation state and proposal defaults of one block in one chain.
struct BlockChain {
  AdaptState adapt;
  double theta0;
  linalg::LowerTriangular shape0;
  double target_alpha;

  static BlockChain make(const BlockPlan& plan, const NodeValues& values, const RunConfig& cfg);
};

/// Quantities of a first-stage step needed by delayed rejection and RBAM.
struct FirstStage {
  StepOutcome outcome;
  std::vector<double> x;  // state before the step
  std::vector<double> y;  // first-stage proposal
  double log_pi_x = 0.0;
  double log_pi_y = 0.0;
  double theta = 0.0;
  const linalg::LowerTriangular* shape = nullptr;
};

/// Random-walk Metropolis step Y = X + theta L W; writes Y on acceptance.
FirstStage rwm_step(const Graph& graph, ChainState& chain, const BlockPlan& plan,
                    const BlockChain& block, bool use_initial, const ProposalKind& proposal);

/// log of the second-stage acceptance probability
///   min{1, pi(Y2) q1(Y2->Y1) (1 - a1(Y2,Y1)) / [pi(X) q1(X->Y1) (1 - a1(X,Y1))]}
/// with every argument on log scale.
double dr_log_accept(double log_pi_x, double log_pi_y1, double log_pi_y2, double log_q_y2_y1,
                     double log_q_x_y1);

/// Second stage after a first-stage rejection: Y2 = X + gamma theta L W2.
StepOutcome dr_step(const Graph& graph, ChainState& chain, const BlockPlan& plan,
                    const FirstStage& first, double gamma, const ProposalKind& proposal);

/// One Metropolis-within-Gibbs sweep over all blocks, in order. Uses
/// chain.iter as the sweep index n (>= 1).
std::vector<StepOutcome> sweep(const Graph& graph, ChainState& chain,
                               std::span<const BlockPlan> plans, std::span<BlockChain> states,
                               const RunConfig& cfg);

/// Post-burn-in ergodic average of a functional.
class FunctionalAccumulator {
public:
  /// Throws UnboundIdentifier when the expression names an unknown node.
  FunctionalAccumulator(const Graph& graph, const lang::Expr& expr);

  void add(const NodeValues& values);
  std::uint64_t count() const { return count_; }
  std::vector<double> average() const;

private:
  lang::CompiledExpr expr_;
  std::vector<double> sum_;
  std::uint64_t count_ = 0;
};

/// Runs nburn + niter sweeps. The functional and the sinks only see
/// post-burn-in sweeps; neither feeds back into the chain.
RunReport run(const Graph& graph, std::span<const Block> blocks, const RunConfig& cfg,
              FunctionalAccumulator* functional, std::span<io::TraceSink* const> sinks);

/// Trace column names: free components in topological order.
std::vector<std::string> trace_columns(const Graph& graph);

}  // namespace dagmc
