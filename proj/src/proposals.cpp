#include "dagmc/proposals.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dagmc/error.hpp"

namespace dagmc {

ProposalKind::ProposalKind(ProposalFamily family, double dof) : family_(family), dof_(dof) {
  if (family == ProposalFamily::student && !(dof > 2.0)) {
    throw InvalidParameter("student proposal needs dof > 2, got " + std::to_string(dof));
  }
}

ProposalKind ProposalKind::parse(std::string_view name, double dof) {
  if (name == "gaussian" || name == "normal") return ProposalKind(ProposalFamily::gaussian, dof);
  if (name == "student" || name == "t") return ProposalKind(ProposalFamily::student, dof);
  if (name == "uniform" || name == "uniform_cube") {
    return ProposalKind(ProposalFamily::uniform_cube, dof);
  }
  if (name == "laplace" || name == "laplace_product") {
    return ProposalKind(ProposalFamily::laplace_product, dof);
  }
  throw InvalidParameter("unknown proposal family: " + std::string(name));
}

std::string_view ProposalKind::name() const {
  switch (family_) {
    case ProposalFamily::gaussian: return "gaussian";
    case ProposalFamily::student: return "student";
    case ProposalFamily::uniform_cube: return "uniform";
    case ProposalFamily::laplace_product: return "laplace";
  }
  return "gaussian";
}

void sample_standard(const ProposalKind& kind, Rng& rng, std::span<double> out) {
  switch (kind.family()) {
    case ProposalFamily::gaussian:
      for (auto& x : out) x = rng.normal();
      break;
    case ProposalFamily::student: {
      for (auto& x : out) x = rng.normal();
      const double scale = 1.0 / std::sqrt(rng.chi_square(kind.dof()) / kind.dof());
      for (auto& x : out) x *= scale;
      break;
    }
    case ProposalFamily::uniform_cube:
      for (auto& x : out) x = 2.0 * rng.uniform() - 1.0;
      break;
    case ProposalFamily::laplace_product:
      for (auto& x : out) {
        const double e = rng.exponential();
        x = rng.uniform() < 0.5 ? -e : e;
      }
      break;
  }
}

std::vector<double> sample_standard(const ProposalKind& kind, std::size_t d, Rng& rng) {
  std::vector<double> out(d);
  sample_standard(kind, rng, out);
  return out;
}

double log_density_standard(const ProposalKind& kind, std::span<const double> w) {
  const double d = static_cast<double>(w.size());
  switch (kind.family()) {
    case ProposalFamily::gaussian: {
      double ss = 0.0;
      for (double x : w) ss += x * x;
      return -0.5 * d * std::log(2.0 * std::numbers::pi) - 0.5 * ss;
    }
    case ProposalFamily::student: {
      const double nu = kind.dof();
      double ss = 0.0;
      for (double x : w) ss += x * x;
      return std::lgamma(0.5 * (nu + d)) - std::lgamma(0.5 * nu) -
             0.5 * d * std::log(nu * std::numbers::pi) - 0.5 * (nu + d) * std::log1p(ss / nu);
    }
    case ProposalFamily::uniform_cube:
      for (double x : w) {
        if (std::abs(x) > 1.0) return -std::numeric_limits<double>::infinity();
      }
      return -d * std::numbers::ln2;
    case ProposalFamily::laplace_product: {
      double s = 0.0;
      for (double x : w) s += std::abs(x);
      return -d * std::numbers::ln2 - s;
    }
  }
  return -std::numeric_limits<double>::infinity();
}

}  // namespace dagmc
