#pragma once

// Dense small-matrix kernels used by the adaptive proposals. Block
// dimensions are small, so everything is stored densely in row-major order.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace dagmc::linalg {

/// Dense symmetric matrix. Only constructible from symmetric input.
class SymmetricMatrix {
public:
  explicit SymmetricMatrix(std::size_t dim);
  /// Throws DimensionMismatch if `rows` is not square or not exactly symmetric.
  static SymmetricMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static SymmetricMatrix from_row_major(std::size_t dim, std::span<const double> entries);
  static SymmetricMatrix identity(std::size_t dim);

  std::size_t dim() const { return dim_; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * dim_ + j]; }
  /// Sets both (i,j) and (j,i).
  void set(std::size_t i, std::size_t j, double value);
  std::span<const double> entries() const { return a_; }

private:
  std::size_t dim_;
  std::vector<double> a_;
};

/// Lower-triangular matrix with strictly positive diagonal.
class LowerTriangular {
public:
  static LowerTriangular identity(std::size_t dim);
  /// Validates the zero upper part and the positive diagonal.
  static LowerTriangular from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static LowerTriangular from_row_major(std::size_t dim, std::span<const double> entries);

  std::size_t dim() const { return dim_; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * dim_ + j]; }
  std::span<const double> entries() const { return a_; }

  /// L * L^T.
  SymmetricMatrix gram() const;
  /// Sum of log diagonal entries, i.e. log det L.
  double log_det() const;

  friend bool operator==(const LowerTriangular&, const LowerTriangular&) = default;

private:
  LowerTriangular(std::size_t dim, std::vector<double> a);
  void check_invariants() const;

  std::size_t dim_ = 0;
  std::vector<double> a_;

  friend LowerTriangular chol_factor(const SymmetricMatrix&);
  friend void rank1_update_inplace(LowerTriangular&, double, double, std::span<const double>,
                                   std::uint64_t*);
};

/// Cholesky factor of a symmetric positive definite matrix. Throws
/// NotPositiveDefinite when a pivot falls below dim * eps * max diagonal.
LowerTriangular chol_factor(const SymmetricMatrix& c);

/// Returns L' with L' L'^T = beta L L^T + w v v^T in O(d^2). Requires
/// beta > 0 and w >= 0. When `flops` is non-null, the number of floating
/// point operations performed is added to it.
LowerTriangular rank1_update(const LowerTriangular& l, double beta, double w,
                             std::span<const double> v, std::uint64_t* flops = nullptr);

/// In-place variant of rank1_update.
void rank1_update_inplace(LowerTriangular& l, double beta, double w, std::span<const double> v,
                          std::uint64_t* flops = nullptr);

/// L * w.
std::vector<double> tri_matvec(const LowerTriangular& l, std::span<const double> w);
void tri_matvec(const LowerTriangular& l, std::span<const double> w, std::span<double> out);

/// Solves L x = b by forward substitution.
std::vector<double> tri_solve(const LowerTriangular& l, std::span<const double> b);

}  // namespace dagmc::linalg
