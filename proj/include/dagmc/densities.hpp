#pragma once

// Built-in log-density table. All functions are on log scale; values
// outside the support give -inf, invalid parameters throw InvalidParameter.
//
//   dnorm(x; mean, var)          normal, parametrised by VARIANCE
//   dexp(x; rate)                exponential
//   duniform(x)                  improper flat density, constant 0
//   dunif(x; a, b)               uniform on [a, b]
//   dgamma(x; shape, rate)
//   dbeta(x; a, b)
//   dlnorm(x; meanlog, varlog)   log-normal, variance of log x
//   dt(x; mean, scale, dof)      location-scale Student t
//   dpois(k; lambda)
//   dbern(k; p)

#include <span>
#include <string_view>

namespace dagmc {

struct BuiltinDensity {
  std::string_view name;
  std::size_t arity;  // number of parameters after x
  double (*log_density)(double x, std::span<const double> params);
  /// Starting value used when a node gives no init_val.
  double (*default_start)(std::span<const double> params);
  bool proper;
};

/// nullptr when `name` is not a built-in.
const BuiltinDensity* find_builtin(std::string_view name);

/// Throws UnknownDensity or BadArity.
double builtin_logdensity(std::string_view name, double x, std::span<const double> params);

}  // namespace dagmc
