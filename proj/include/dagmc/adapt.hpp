#pragma once

// Adaptation rules for the random-walk proposal: covariance (AM and its
// Rao-Blackwellised form), scaling (ASCM, the AMCMC rule, user rules),
// weight and mixing schedules, and burn-in strategies.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dagmc/linalg.hpp"

namespace dagmc {

/// Per-block adaptation state: scaling theta, shape L, running mean M and
/// the number of adaptation steps taken so far.
struct AdaptState {
  double theta;
  linalg::LowerTriangular shape;
  std::vector<double> mean;
  std::uint64_t step = 0;

  /// theta0, L0 = I, M0 = x0.
  static AdaptState initial(std::span<const double> x0, double theta0);
  /// theta0 = 2.38 / sqrt(d).
  static double default_theta(std::size_t dim);

  std::size_t dim() const { return mean.size(); }
};

struct WeightSchedule {
  enum class Kind { reciprocal, constant, power };

  Kind kind = Kind::reciprocal;
  double eta0 = 0.01;
  double gamma = 1.0;

  static WeightSchedule reciprocal() { return {}; }
  /// Requires eta0 in (0,1).
  static WeightSchedule constant(double eta0);
  /// Requires gamma in (1/2, 1].
  static WeightSchedule power(double gamma);
};

/// eta_n for n >= 1: 1/(n+1), eta0, or (n+1)^-gamma.
double eta(const WeightSchedule& schedule, std::uint64_t n);

struct MixSchedule {
  enum class Kind { constant, user_sequence };

  Kind kind = Kind::constant;
  double p0 = 0.0;
  std::function<double(std::uint64_t)> sequence;

  static MixSchedule constant(double p0);
  static MixSchedule user(std::function<double(std::uint64_t)> sequence);
};

/// Probability of proposing with (theta0, L0) at step n, clamped to [0,1].
double mix_probability(const MixSchedule& schedule, std::uint64_t n);

struct BurninStrategy {
  enum class Kind { greedy, traditional, freeze };

  Kind kind = Kind::greedy;
  std::uint64_t nburn = 0;
};

struct AdaptationPhase {
  bool update_params;
  bool use_initial_proposal;

  friend bool operator==(const AdaptationPhase&, const AdaptationPhase&) = default;
};

AdaptationPhase adaptation_active(const BurninStrategy& strategy, std::uint64_t n);

enum class CovarianceAdapt { none, am, rb_am };
enum class ScalingAdapt { none, ascm, amcmc_rule, user_rule };

/// User scaling rule: (sc, alpha, dim, k) -> new scaling.
using ScalingRule = std::function<double(double, double, std::size_t, std::uint64_t)>;

struct AlgorithmChoice {
  CovarianceAdapt covariance = CovarianceAdapt::none;
  ScalingAdapt scaling = ScalingAdapt::ascm;
  /// Defaults per block dimension when unset.
  std::optional<double> target_alpha;
  ScalingRule user_rule;

  bool adaptive() const {
    return covariance != CovarianceAdapt::none || scaling != ScalingAdapt::none;
  }
};

/// 0.44 for one-dimensional blocks, 0.234 otherwise.
double default_target_alpha(std::size_t block_dim);

/// AM mean/covariance recursion; the covariance uses the pre-update mean.
AdaptState am_update(const AdaptState& state, std::span<const double> x, double eta_n);
void am_update_inplace(AdaptState& state, std::span<const double> x, double eta_n);

/// Rao-Blackwellised AM: averages the accept and reject outcomes with weight
/// alpha. Two rank-one updates with weights eta*alpha and eta*(1-alpha).
AdaptState rb_am_update(const AdaptState& state, std::span<const double> x_prev,
                        std::span<const double> y, double alpha, double eta_n);
void rb_am_update_inplace(AdaptState& state, std::span<const double> x_prev,
                          std::span<const double> y, double alpha, double eta_n);

/// theta * [1 + eta (alpha / target - 1)].
double ascm_update(double theta, double alpha, double eta_n, double target_alpha);

/// sc * exp(delta * min(0.01, 1/sqrt(k+1))), delta = +1 iff alpha > 0.44.
double amcmc_scaling(double sc, double alpha, std::uint64_t k);

}  // namespace dagmc
