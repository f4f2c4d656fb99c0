#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace dagmc {

enum class ProposalFamily { gaussian, student, uniform_cube, laplace_product };

/// Symmetric proposal family q0. Student proposals are jointly
/// multivariate: one chi-square divisor per draw.
class ProposalKind {
public:
  static constexpr double kDefaultDof = 6.0;

  ProposalKind() = default;
  /// Throws InvalidParameter unless dof > 2 for student.
  explicit ProposalKind(ProposalFamily family, double dof = kDefaultDof);

  /// Accepts "gaussian"/"normal", "student"/"t", "uniform"/"uniform_cube",
  /// "laplace"/"laplace_product".
  static ProposalKind parse(std::string_view name, double dof = kDefaultDof);

  ProposalFamily family() const { return family_; }
  double dof() const { return dof_; }
  std::string_view name() const;

  friend bool operator==(const ProposalKind&, const ProposalKind&) = default;

private:
  ProposalFamily family_ = ProposalFamily::gaussian;
  double dof_ = kDefaultDof;
};

/// Seedable 64-bit generator; equal seeds give identical streams.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double normal() { return normal_(engine_); }
  double chi_square(double dof) { return std::chi_squared_distribution<double>(dof)(engine_); }
  double exponential() { return std::exponential_distribution<double>(1.0)(engine_); }

  std::mt19937_64& engine() { return engine_; }

private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Draws W from the standard member of `kind` into `out` (d = out.size()).
void sample_standard(const ProposalKind& kind, Rng& rng, std::span<double> out);
std::vector<double> sample_standard(const ProposalKind& kind, std::size_t d, Rng& rng);

/// log q0(w) with normalisation; -inf outside the support.
double log_density_standard(const ProposalKind& kind, std::span<const double> w);

}  // namespace dagmc
