#include "dagmc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dagmc/error.hpp"

namespace dagmc::linalg {

namespace {

void check_length(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw DimensionMismatch(std::string(what) + ": expected length " + std::to_string(want) +
                            ", got " + std::to_string(got));
  }
}

std::vector<double> flatten(std::initializer_list<std::initializer_list<double>> rows,
                            std::size_t& dim) {
  dim = rows.size();
  std::vector<double> a;
  a.reserve(dim * dim);
  for (const auto& row : rows) {
    check_length(row.size(), dim, "matrix row");
    a.insert(a.end(), row.begin(), row.end());
  }
  return a;
}

}  // namespace

SymmetricMatrix::SymmetricMatrix(std::size_t dim) : dim_(dim), a_(dim * dim, 0.0) {
  if (dim == 0) throw DimensionMismatch("matrix dimension must be positive");
}

SymmetricMatrix SymmetricMatrix::from_rows(
    std::initializer_list<std::initializer_list<double>> rows) {
  std::size_t dim = 0;
  auto a = flatten(rows, dim);
  return from_row_major(dim, a);
}

SymmetricMatrix SymmetricMatrix::from_row_major(std::size_t dim, std::span<const double> entries) {
  check_length(entries.size(), dim * dim, "symmetric matrix");
  SymmetricMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      if (entries[i * dim + j] != entries[j * dim + i]) {
        throw DimensionMismatch("matrix is not symmetric at (" + std::to_string(i) + "," +
                                std::to_string(j) + ")");
      }
    }
  }
  std::copy(entries.begin(), entries.end(), m.a_.begin());
  return m;
}

SymmetricMatrix SymmetricMatrix::identity(std::size_t dim) {
  SymmetricMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m.a_[i * dim + i] = 1.0;
  return m;
}

void SymmetricMatrix::set(std::size_t i, std::size_t j, double value) {
  a_[i * dim_ + j] = value;
  a_[j * dim_ + i] = value;
}

LowerTriangular::LowerTriangular(std::size_t dim, std::vector<double> a)
    : dim_(dim), a_(std::move(a)) {}

LowerTriangular LowerTriangular::identity(std::size_t dim) {
  if (dim == 0) throw DimensionMismatch("matrix dimension must be positive");
  std::vector<double> a(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) a[i * dim + i] = 1.0;
  return LowerTriangular(dim, std::move(a));
}

LowerTriangular LowerTriangular::from_rows(
    std::initializer_list<std::initializer_list<double>> rows) {
  std::size_t dim = 0;
  auto a = flatten(rows, dim);
  return from_row_major(dim, a);
}

LowerTriangular LowerTriangular::from_row_major(std::size_t dim, std::span<const double> entries) {
  if (dim == 0) throw DimensionMismatch("matrix dimension must be positive");
  check_length(entries.size(), dim * dim, "lower triangular matrix");
  LowerTriangular l(dim, std::vector<double>(entries.begin(), entries.end()));
  l.check_invariants();
  return l;
}

void LowerTriangular::check_invariants() const {
  for (std::size_t i = 0; i < dim_; ++i) {
    if (!(a_[i * dim_ + i] > 0.0)) {
      throw InvalidParameter("lower triangular matrix needs a positive diagonal");
    }
    for (std::size_t j = i + 1; j < dim_; ++j) {
      if (a_[i * dim_ + j] != 0.0) {
        throw InvalidParameter("lower triangular matrix has a non-zero upper entry");
      }
    }
  }
}

SymmetricMatrix LowerTriangular::gram() const {
  SymmetricMatrix c(dim_);
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k <= j; ++k) s += a_[i * dim_ + k] * a_[j * dim_ + k];
      c.set(i, j, s);
    }
  }
  return c;
}

double LowerTriangular::log_det() const {
  double s = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) s += std::log(a_[i * dim_ + i]);
  return s;
}

LowerTriangular chol_factor(const SymmetricMatrix& c) {
  const std::size_t d = c.dim();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < d; ++i) max_diag = std::max(max_diag, c(i, i));
  const double tol = static_cast<double>(d) * std::numeric_limits<double>::epsilon() * max_diag;

  std::vector<double> a(d * d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double pivot = c(j, j);
    for (std::size_t k = 0; k < j; ++k) pivot -= a[j * d + k] * a[j * d + k];
    if (!(pivot > tol)) throw NotPositiveDefinite(j, pivot);
    const double ljj = std::sqrt(pivot);
    a[j * d + j] = ljj;
    for (std::size_t i = j + 1; i < d; ++i) {
      double s = c(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= a[i * d + k] * a[j * d + k];
      a[i * d + j] = s / ljj;
    }
  }
  return LowerTriangular(d, std::move(a));
}

void rank1_update_inplace(LowerTriangular& l, double beta, double w, std::span<const double> v,
                          std::uint64_t* flops) {
  const std::size_t d = l.dim();
  check_length(v.size(), d, "rank1_update vector");
  if (!(beta > 0.0)) throw InvalidParameter("rank1_update requires beta > 0");
  if (!(w >= 0.0)) throw InvalidParameter("rank1_update requires w >= 0");

  std::uint64_t ops = 0;
  auto& a = l.a_;
  if (beta != 1.0) {
    const double s = std::sqrt(beta);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j <= i; ++j) a[i * d + j] *= s;
    }
    ops += d * (d + 1) / 2 + 1;
  }

  if (w > 0.0) {
    // Givens-style update of L L^T + x x^T with x = sqrt(w) v.
    const double sw = std::sqrt(w);
    std::vector<double> x(v.begin(), v.end());
    for (auto& xi : x) xi *= sw;
    ops += d + 1;
    for (std::size_t k = 0; k < d; ++k) {
      const double lkk = a[k * d + k];
      const double r = std::hypot(lkk, x[k]);
      const double c = r / lkk;
      const double s = x[k] / lkk;
      a[k * d + k] = r;
      ops += 3;
      for (std::size_t i = k + 1; i < d; ++i) {
        const double lik = (a[i * d + k] + s * x[i]) / c;
        a[i * d + k] = lik;
        x[i] = c * x[i] - s * lik;
        ops += 6;
      }
    }
  }
  if (flops != nullptr) *flops += ops;
}

LowerTriangular rank1_update(const LowerTriangular& l, double beta, double w,
                             std::span<const double> v, std::uint64_t* flops) {
  LowerTriangular out = l;
  rank1_update_inplace(out, beta, w, v, flops);
  return out;
}

void tri_matvec(const LowerTriangular& l, std::span<const double> w, std::span<double> out) {
  const std::size_t d = l.dim();
  check_length(w.size(), d, "tri_matvec vector");
  check_length(out.size(), d, "tri_matvec output");
  const auto a = l.entries();
  for (std::size_t i = d; i-- > 0;) {
    double s = 0.0;
    for (std::size_t j = 0; j <= i; ++j) s += a[i * d + j] * w[j];
    out[i] = s;
  }
}

std::vector<double> tri_matvec(const LowerTriangular& l, std::span<const double> w) {
  std::vector<double> out(l.dim());
  tri_matvec(l, w, out);
  return out;
}

std::vector<double> tri_solve(const LowerTriangular& l, std::span<const double> b) {
  const std::size_t d = l.dim();
  check_length(b.size(), d, "tri_solve vector");
  const auto a = l.entries();
  std::vector<double> x(d);
  for (std::size_t i = 0; i < d; ++i) {
    double s = b[i];
    for (std::size_t j = 0; j < i; ++j) s -= a[i * d + j] * x[j];
    x[i] = s / a[i * d + i];
  }
  return x;
}

}  // namespace dagmc::linalg
