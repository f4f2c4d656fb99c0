#include "dagmc/densities.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dagmc/error.hpp"

namespace dagmc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require(bool ok, const char* what) {
  if (!ok) throw InvalidParameter(what);
}

double dnorm(double x, std::span<const double> p) {
  const double mean = p[0], var = p[1];
  require(var > 0.0, "dnorm: variance must be positive");
  const double z = x - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * var) - z * z / (2.0 * var);
}

double dexp(double x, std::span<const double> p) {
  const double rate = p[0];
  require(rate > 0.0, "dexp: rate must be positive");
  if (x < 0.0) return kNegInf;
  return std::log(rate) - rate * x;
}

double duniform(double, std::span<const double>) { return 0.0; }

double dunif(double x, std::span<const double> p) {
  const double a = p[0], b = p[1];
  require(a < b, "dunif: need lower < upper");
  if (x < a || x > b) return kNegInf;
  return -std::log(b - a);
}

double dgamma(double x, std::span<const double> p) {
  const double shape = p[0], rate = p[1];
  require(shape > 0.0 && rate > 0.0, "dgamma: shape and rate must be positive");
  if (x <= 0.0) return kNegInf;
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double dbeta(double x, std::span<const double> p) {
  const double a = p[0], b = p[1];
  require(a > 0.0 && b > 0.0, "dbeta: shapes must be positive");
  if (x <= 0.0 || x >= 1.0) return kNegInf;
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(x) +
         (b - 1.0) * std::log1p(-x);
}

double dlnorm(double x, std::span<const double> p) {
  const double meanlog = p[0], varlog = p[1];
  require(varlog > 0.0, "dlnorm: variance must be positive");
  if (x <= 0.0) return kNegInf;
  const double lx = std::log(x);
  const double z = lx - meanlog;
  return -lx - 0.5 * std::log(2.0 * std::numbers::pi * varlog) - z * z / (2.0 * varlog);
}

double dt(double x, std::span<const double> p) {
  const double mean = p[0], scale = p[1], nu = p[2];
  require(scale > 0.0 && nu > 0.0, "dt: scale and dof must be positive");
  const double z = (x - mean) / scale;
  return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
         0.5 * std::log(nu * std::numbers::pi) - std::log(scale) -
         0.5 * (nu + 1.0) * std::log1p(z * z / nu);
}

double dpois(double k, std::span<const double> p) {
  const double lambda = p[0];
  require(lambda > 0.0, "dpois: rate must be positive");
  if (k < 0.0 || k != std::floor(k)) return kNegInf;
  return k * std::log(lambda) - lambda - std::lgamma(k + 1.0);
}

double dbern(double k, std::span<const double> p) {
  const double prob = p[0];
  require(prob >= 0.0 && prob <= 1.0, "dbern: probability must lie in [0,1]");
  if (k == 1.0) return std::log(prob);
  if (k == 0.0) return std::log1p(-prob);
  return kNegInf;
}

double start_zero(std::span<const double>) { return 0.0; }
double start_one(std::span<const double>) { return 1.0; }
double start_half(std::span<const double>) { return 0.5; }
double start_mid(std::span<const double> p) { return 0.5 * (p[0] + p[1]); }

constexpr std::array<BuiltinDensity, 10> kTable{{
    {"dnorm", 2, dnorm, start_zero, true},
    {"dexp", 1, dexp, start_one, true},
    {"duniform", 0, duniform, start_zero, false},
    {"dunif", 2, dunif, start_mid, true},
    {"dgamma", 2, dgamma, start_one, true},
    {"dbeta", 2, dbeta, start_half, true},
    {"dlnorm", 2, dlnorm, start_one, true},
    {"dt", 3, dt, start_zero, true},
    {"dpois", 1, dpois, start_zero, true},
    {"dbern", 1, dbern, start_zero, true},
}};

}  // namespace

const BuiltinDensity* find_builtin(std::string_view name) {
  for (const auto& entry : kTable) {
    if (entry.name == name) return &entry;
  }
  return nullptr;
}

double builtin_logdensity(std::string_view name, double x, std::span<const double> params) {
  const auto* entry = find_builtin(name);
  if (entry == nullptr) throw UnknownDensity(std::string(name));
  if (params.size() != entry->arity) {
    throw BadArity(std::string(name) + " takes " + std::to_string(entry->arity) +
                   " parameters, got " + std::to_string(params.size()));
  }
  return entry->log_density(x, params);
}

}  // namespace dagmc
