#include "dagmc/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "dagmc/error.hpp"

namespace dagmc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void config_error(const std::string& message) {
  throw ModelError(ModelError::Kind::BadConfig, message);
}

/// log(1 - exp(m)) for m <= 0.
double log1mexp(double m) {
  if (m >= 0.0) return kNegInf;
  return m > -std::numbers::ln2 ? std::log(-std::expm1(m)) : std::log1p(-std::exp(m));
}

double log_alpha1(double log_pi_from, double log_pi_to) {
  if (log_pi_to == kNegInf) return kNegInf;
  return std::min(0.0, log_pi_to - log_pi_from);
}

void gather(const NodeValues& values, const BlockPlan& plan, std::vector<double>& out) {
  out.resize(plan.flat.size());
  for (std::size_t i = 0; i < plan.flat.size(); ++i) out[i] = values.flat[plan.flat[i]];
}

void scatter(NodeValues& values, const BlockPlan& plan, std::span<const double> in) {
  for (std::size_t i = 0; i < plan.flat.size(); ++i) values.flat[plan.flat[i]] = in[i];
}

/// Block log-density at `point`, leaving `values` as they were.
double log_pi_at(const Graph& graph, NodeValues& values, const BlockPlan& plan,
                 std::span<const double> point, std::span<const double> restore) {
  scatter(values, plan, point);
  double lp;
  try {
    lp = graph.sum_factors(values, plan.dependents);
  } catch (...) {
    scatter(values, plan, restore);
    throw;
  }
  scatter(values, plan, restore);
  return lp;
}

/// Stage-one proposal log-density of moving from `from` to `to`, up to the
/// constant -d log theta - log det L.
double log_q1(const ProposalKind& proposal, double theta, const linalg::LowerTriangular& shape,
              std::span<const double> from, std::span<const double> to) {
  std::vector<double> diff(from.size());
  for (std::size_t i = 0; i < from.size(); ++i) diff[i] = (to[i] - from[i]) / theta;
  return log_density_standard(proposal, linalg::tri_solve(shape, diff));
}

bool draw_accept(Rng& rng, double log_alpha) {
  if (log_alpha >= 0.0) return true;
  if (log_alpha == kNegInf) return false;
  return rng.uniform() < std::exp(log_alpha);
}

}  // namespace

void RunConfig::validate() const {
  if (niter == 0) config_error("niter must be positive");
  if (nburn >= niter) config_error("nburn must be smaller than niter");
  if (thin == 0) config_error("thin must be positive");
  if (dr_scale && !(*dr_scale > 0.0 && *dr_scale < 1.0)) config_error("dr must lie in (0,1)");
  if (theta0 && !(*theta0 > 0.0)) config_error("theta0 must be positive");
  if (algorithm.target_alpha &&
      !(*algorithm.target_alpha > 0.0 && *algorithm.target_alpha < 1.0)) {
    config_error("target_alpha must lie in (0,1)");
  }
  if (algorithm.scaling == ScalingAdapt::user_rule && !algorithm.user_rule) {
    config_error("user scaling rule selected but none given");
  }
}

BlockPlan BlockPlan::make(const Graph& graph, Block block) {
  BlockPlan plan;
  plan.dependents = graph.block_dependents(block);
  for (const auto& m : block.members) plan.flat.push_back(graph.flat_index(m));
  // Whole-node blocks are named by node; partial ones by component.
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < block.members.size();) {
    const auto& m = block.members[i];
    const Node& node = graph.node(m.node);
    std::size_t j = i;
    while (j < block.members.size() && block.members[j].node == m.node &&
           block.members[j].index == j - i) {
      ++j;
    }
    if (j - i == node.dim) {
      parts.push_back(node.name);
      i = j;
    } else {
      parts.push_back(graph.component_name(m));
      ++i;
    }
  }
  for (const auto& p : parts) {
    if (!plan.name.empty()) plan.name += ", ";
    plan.name += p;
  }
  plan.block = std::move(block);
  return plan;
}

BlockChain BlockChain::make(const BlockPlan& plan, const NodeValues& values, const RunConfig& cfg) {
  std::vector<double> x0;
  gather(values, plan, x0);
  const double theta0 = cfg.theta0.value_or(AdaptState::default_theta(plan.block.dim()));
  auto adapt = AdaptState::initial(x0, theta0);
  auto shape0 = adapt.shape;
  return BlockChain{std::move(adapt), theta0, std::move(shape0),
                    cfg.algorithm.target_alpha.value_or(default_target_alpha(plan.block.dim()))};
}

FirstStage rwm_step(const Graph& graph, ChainState& chain, const BlockPlan& plan,
                    const BlockChain& block, bool use_initial, const ProposalKind& proposal) {
  FirstStage s;
  s.theta = use_initial ? block.theta0 : block.adapt.theta;
  s.shape = use_initial ? &block.shape0 : &block.adapt.shape;
  const std::size_t d = plan.flat.size();
  if (s.shape->dim() != d) throw DimensionMismatch("adaptation state does not match block");

  gather(chain.values, plan, s.x);
  std::vector<double> w(d);
  sample_standard(proposal, chain.rng, w);
  linalg::tri_matvec(*s.shape, w, w);
  s.y.resize(d);
  for (std::size_t i = 0; i < d; ++i) s.y[i] = s.x[i] + s.theta * w[i];

  s.log_pi_x = graph.sum_factors(chain.values, plan.dependents);
  scatter(chain.values, plan, s.y);
  try {
    s.log_pi_y = graph.sum_factors(chain.values, plan.dependents);
  } catch (...) {
    scatter(chain.values, plan, s.x);
    throw;
  }

  const double la = log_alpha1(s.log_pi_x, s.log_pi_y);
  s.outcome.alpha1 = std::exp(la);
  s.outcome.stage = Stage::first;
  s.outcome.accepted = draw_accept(chain.rng, la);
  if (!s.outcome.accepted) scatter(chain.values, plan, s.x);
  return s;
}

double dr_log_accept(double log_pi_x, double log_pi_y1, double log_pi_y2, double log_q_y2_y1,
                     double log_q_x_y1) {
  if (log_pi_y2 == kNegInf || log_q_y2_y1 == kNegInf) return kNegInf;
  const double num = log_pi_y2 + log_q_y2_y1 + log1mexp(log_alpha1(log_pi_y2, log_pi_y1));
  if (num == kNegInf) return kNegInf;
  const double den = log_pi_x + log_q_x_y1 + log1mexp(log_alpha1(log_pi_x, log_pi_y1));
  return std::min(0.0, num - den);
}

StepOutcome dr_step(const Graph& graph, ChainState& chain, const BlockPlan& plan,
                    const FirstStage& first, double gamma, const ProposalKind& proposal) {
  const std::size_t d = plan.flat.size();
  std::vector<double> w(d);
  sample_standard(proposal, chain.rng, w);
  linalg::tri_matvec(*first.shape, w, w);
  std::vector<double> y2(d);
  for (std::size_t i = 0; i < d; ++i) y2[i] = first.x[i] + gamma * first.theta * w[i];

  const double log_pi_y2 = log_pi_at(graph, chain.values, plan, y2, first.x);
  double la2 = kNegInf;
  if (log_pi_y2 != kNegInf) {
    const double q_y2_y1 = log_q1(proposal, first.theta, *first.shape, y2, first.y);
    const double q_x_y1 = log_q1(proposal, first.theta, *first.shape, first.x, first.y);
    la2 = dr_log_accept(first.log_pi_x, first.log_pi_y, log_pi_y2, q_y2_y1, q_x_y1);
  }

  StepOutcome out = first.outcome;
  out.stage = Stage::delayed;
  out.alpha2 = std::exp(la2);
  out.accepted = draw_accept(chain.rng, la2);
  if (out.accepted) scatter(chain.values, plan, y2);
  return out;
}

std::vector<StepOutcome> sweep(const Graph& graph, ChainState& chain,
                               std::span<const BlockPlan> plans, std::span<BlockChain> states,
                               const RunConfig& cfg) {
  if (plans.size() != states.size()) throw DimensionMismatch("blocks and states are not aligned");
  const std::uint64_t n = chain.iter;
  const AdaptationPhase phase = adaptation_active(cfg.strategy(), n);
  const AlgorithmChoice& algo = cfg.algorithm;
  std::vector<StepOutcome> outcomes;
  outcomes.reserve(plans.size());
  std::vector<double> current;

  for (std::size_t b = 0; b < plans.size(); ++b) {
    const BlockPlan& plan = plans[b];
    BlockChain& state = states[b];

    bool use_initial = phase.use_initial_proposal;
    if (!use_initial) {
      const double p = mix_probability(cfg.mix, n);
      if (p >= 1.0) {
        use_initial = true;
      } else if (p > 0.0) {
        use_initial = chain.rng.uniform() < p;
      }
    }

    FirstStage first = rwm_step(graph, chain, plan, state, use_initial, cfg.proposal);
    StepOutcome outcome = first.outcome;
    if (!outcome.accepted && cfg.dr_scale) {
      outcome = dr_step(graph, chain, plan, first, *cfg.dr_scale, cfg.proposal);
    }

    if (phase.update_params && algo.adaptive()) {
      AdaptState& a = state.adapt;
      const std::uint64_t k = cfg.global_step_counter ? n - 1 : a.step;
      const double alpha = outcome.alpha1;
      switch (algo.covariance) {
        case CovarianceAdapt::none: break;
        case CovarianceAdapt::am:
          gather(chain.values, plan, current);
          am_update_inplace(a, current, eta(cfg.covariance_weights, k + 1));
          break;
        case CovarianceAdapt::rb_am:
          rb_am_update_inplace(a, first.x, first.y, alpha, eta(cfg.covariance_weights, k + 1));
          break;
      }
      switch (algo.scaling) {
        case ScalingAdapt::none: break;
        case ScalingAdapt::ascm:
          a.theta = ascm_update(a.theta, alpha, eta(cfg.scaling_weights, k + 1), state.target_alpha);
          break;
        case ScalingAdapt::amcmc_rule: a.theta = amcmc_scaling(a.theta, alpha, k); break;
        case ScalingAdapt::user_rule:
          a.theta = algo.user_rule(a.theta, alpha, plan.block.dim(), k);
          break;
      }
      if (!(a.theta > 0.0) || !std::isfinite(a.theta)) {
        throw EvaluationError("scaling of block '" + plan.name + "' became " +
                              std::to_string(a.theta));
      }
      ++a.step;
    }
    outcomes.push_back(outcome);
  }
  return outcomes;
}

FunctionalAccumulator::FunctionalAccumulator(const Graph& graph, const lang::Expr& expr)
    : expr_(lang::CompiledExpr::compile(expr, [&](const std::string& name) -> std::optional<lang::Slot> {
        const auto id = graph.find(name);
        if (!id) return std::nullopt;
        const Node& node = graph.node(*id);
        return lang::Slot{node.offset, node.dim, node.dim > 1};
      })) {}

void FunctionalAccumulator::add(const NodeValues& values) {
  const lang::Value v = expr_.eval(values.flat);
  const auto elems = v.elements();
  if (count_ == 0) {
    sum_.assign(elems.size(), 0.0);
  } else if (elems.size() != sum_.size()) {
    throw EvaluationError("functional changed length between samples");
  }
  for (std::size_t i = 0; i < elems.size(); ++i) sum_[i] += elems[i];
  ++count_;
}

std::vector<double> FunctionalAccumulator::average() const {
  std::vector<double> out(sum_);
  for (auto& v : out) v /= static_cast<double>(count_);
  return out;
}

std::vector<std::string> trace_columns(const Graph& graph) {
  std::vector<std::string> out;
  for (const auto& c : graph.free_components()) out.push_back(graph.component_name(c));
  return out;
}

RunReport run(const Graph& graph, std::span<const Block> blocks, const RunConfig& cfg,
              FunctionalAccumulator* functional, std::span<io::TraceSink* const> sinks) {
  cfg.validate();
  graph.validate_blocks(blocks);
  const auto start = std::chrono::steady_clock::now();

  ChainState chain(graph.initial_values(), cfg.seed);
  const double initial = graph.log_joint(chain.values);
  if (!(initial > kNegInf)) {
    throw ModelError(ModelError::Kind::InitialDensity,
                     "initial state has zero density; set init_val for the free nodes");
  }

  std::vector<BlockPlan> plans;
  std::vector<BlockChain> states;
  for (const auto& block : blocks) {
    plans.push_back(BlockPlan::make(graph, block));
    states.push_back(BlockChain::make(plans.back(), chain.values, cfg));
  }

  RunReport report;
  report.delayed_rejection = cfg.dr_scale.has_value();
  report.blocks.resize(plans.size());
  for (std::size_t b = 0; b < plans.size(); ++b) report.blocks[b].name = plans[b].name;
  for (const auto& name : graph.improper_free_nodes()) {
    report.warnings.push_back("free node '" + name + "' has only an improper density");
  }

  const auto free = graph.free_components();
  std::vector<double> row(free.size());
  const std::uint64_t total = cfg.nburn + cfg.niter;
  for (std::uint64_t n = 1; n <= total; ++n) {
    chain.iter = n;
    const auto outcomes = sweep(graph, chain, plans, states, cfg);
    if (n <= cfg.nburn) continue;
    for (std::size_t b = 0; b < outcomes.size(); ++b) {
      auto& br = report.blocks[b];
      ++br.attempts;
      if (outcomes[b].accepted) {
        if (outcomes[b].stage == Stage::delayed) {
          ++br.accepted_delayed;
        } else {
          ++br.accepted_first;
        }
      }
    }
    if (functional != nullptr) functional->add(chain.values);
    if (!sinks.empty()) {
      for (std::size_t i = 0; i < free.size(); ++i) row[i] = chain.values.flat[graph.flat_index(free[i])];
      for (auto* sink : sinks) sink->write(row);
    }
  }
  for (auto* sink : sinks) sink->finalize();

  for (std::size_t b = 0; b < plans.size(); ++b) {
    report.blocks[b].theta = states[b].adapt.theta;
    const auto entries = states[b].adapt.shape.entries();
    report.blocks[b].shape.assign(entries.begin(), entries.end());
  }
  if (functional != nullptr) {
    report.functional_average = functional->average();
    report.functional_samples = functional->count();
  }
  report.sweeps = total;
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace dagmc
