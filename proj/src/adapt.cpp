#include "dagmc/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dagmc/error.hpp"

namespace dagmc {

namespace {

void check_eta(double eta_n) {
  if (!(eta_n > 0.0 && eta_n < 1.0)) {
    throw InvalidParameter("adaptation weight must lie in (0,1), got " + std::to_string(eta_n));
  }
}

void check_dim(const AdaptState& state, std::span<const double> x) {
  if (x.size() != state.dim()) {
    throw DimensionMismatch("adaptation input has length " + std::to_string(x.size()) +
                            ", block dimension is " + std::to_string(state.dim()));
  }
}

}  // namespace

AdaptState AdaptState::initial(std::span<const double> x0, double theta0) {
  if (!(theta0 > 0.0)) throw InvalidParameter("initial scaling must be positive");
  return AdaptState{theta0, linalg::LowerTriangular::identity(x0.size()),
                    std::vector<double>(x0.begin(), x0.end()), 0};
}

double AdaptState::default_theta(std::size_t dim) {
  return 2.38 / std::sqrt(static_cast<double>(dim));
}

WeightSchedule WeightSchedule::constant(double eta0) {
  if (!(eta0 > 0.0 && eta0 < 1.0)) throw InvalidParameter("constant weight must lie in (0,1)");
  return WeightSchedule{Kind::constant, eta0, 1.0};
}

WeightSchedule WeightSchedule::power(double gamma) {
  if (!(gamma > 0.5 && gamma <= 1.0)) throw InvalidParameter("weight exponent must lie in (1/2,1]");
  return WeightSchedule{Kind::power, 0.01, gamma};
}

double eta(const WeightSchedule& schedule, std::uint64_t n) {
  const double m = static_cast<double>(n) + 1.0;
  switch (schedule.kind) {
    case WeightSchedule::Kind::reciprocal: return 1.0 / m;
    case WeightSchedule::Kind::constant: return schedule.eta0;
    case WeightSchedule::Kind::power: return std::pow(m, -schedule.gamma);
  }
  return 1.0 / m;
}

MixSchedule MixSchedule::constant(double p0) {
  if (!(p0 >= 0.0 && p0 <= 1.0)) throw InvalidParameter("mixing probability must lie in [0,1]");
  return MixSchedule{Kind::constant, p0, {}};
}

MixSchedule MixSchedule::user(std::function<double(std::uint64_t)> sequence) {
  return MixSchedule{Kind::user_sequence, 0.0, std::move(sequence)};
}

double mix_probability(const MixSchedule& schedule, std::uint64_t n) {
  if (schedule.kind == MixSchedule::Kind::constant || !schedule.sequence) return schedule.p0;
  const double p = schedule.sequence(n);
  if (std::isnan(p)) throw InvalidParameter("mixing sequence returned NaN");
  return std::clamp(p, 0.0, 1.0);
}

AdaptationPhase adaptation_active(const BurninStrategy& strategy, std::uint64_t n) {
  const bool in_burnin = n <= strategy.nburn;
  switch (strategy.kind) {
    case BurninStrategy::Kind::greedy: return {true, false};
    case BurninStrategy::Kind::traditional: return {true, in_burnin};
    case BurninStrategy::Kind::freeze: return {in_burnin, false};
  }
  return {true, false};
}

double default_target_alpha(std::size_t block_dim) { return block_dim == 1 ? 0.44 : 0.234; }

void am_update_inplace(AdaptState& state, std::span<const double> x, double eta_n) {
  check_dim(state, x);
  check_eta(eta_n);
  const std::size_t d = state.dim();
  std::vector<double> innovation(d);
  for (std::size_t i = 0; i < d; ++i) innovation[i] = x[i] - state.mean[i];
  linalg::rank1_update_inplace(state.shape, 1.0 - eta_n, eta_n, innovation);
  for (std::size_t i = 0; i < d; ++i) state.mean[i] = (1.0 - eta_n) * state.mean[i] + eta_n * x[i];
}

AdaptState am_update(const AdaptState& state, std::span<const double> x, double eta_n) {
  AdaptState out = state;
  am_update_inplace(out, x, eta_n);
  return out;
}

void rb_am_update_inplace(AdaptState& state, std::span<const double> x_prev,
                          std::span<const double> y, double alpha, double eta_n) {
  check_dim(state, x_prev);
  check_dim(state, y);
  check_eta(eta_n);
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidParameter("alpha must lie in [0,1]");
  const std::size_t d = state.dim();
  std::vector<double> dy(d), dx(d);
  for (std::size_t i = 0; i < d; ++i) {
    dy[i] = y[i] - state.mean[i];
    dx[i] = x_prev[i] - state.mean[i];
  }
  linalg::rank1_update_inplace(state.shape, 1.0 - eta_n, eta_n * alpha, dy);
  linalg::rank1_update_inplace(state.shape, 1.0, eta_n * (1.0 - alpha), dx);
  for (std::size_t i = 0; i < d; ++i) {
    state.mean[i] =
        (1.0 - eta_n) * state.mean[i] + eta_n * (alpha * y[i] + (1.0 - alpha) * x_prev[i]);
  }
}

AdaptState rb_am_update(const AdaptState& state, std::span<const double> x_prev,
                        std::span<const double> y, double alpha, double eta_n) {
  AdaptState out = state;
  rb_am_update_inplace(out, x_prev, y, alpha, eta_n);
  return out;
}

double ascm_update(double theta, double alpha, double eta_n, double target_alpha) {
  return theta * (1.0 + eta_n * (alpha / target_alpha - 1.0));
}

double amcmc_scaling(double sc, double alpha, std::uint64_t k) {
  const double delta = alpha > 0.44 ? 1.0 : -1.0;
  return sc * std::exp(delta * std::min(0.01, 1.0 / std::sqrt(static_cast<double>(k) + 1.0)));
}

}  // namespace dagmc
