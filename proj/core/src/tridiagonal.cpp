#include "hhmo/tridiagonal.hpp"

#include <algorithm>
#include <cstddef>
#include <utility>

#include "hhmo/errors.hpp"

namespace hhmo {

void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<double> rhs,
                       std::span<double> scratch) {
  const std::size_t n = diag.size();
  if (lower.size() != n || upper.size() != n || rhs.size() != n || scratch.size() != n) {
    throw Error(ErrorCode::LengthMismatch, "tridiagonal system with inconsistent lengths");
  }
  if (n == 0) return;
  double denom = diag[0];
  scratch[0] = upper[0] / denom;
  rhs[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = diag[i] - lower[i] * scratch[i - 1];
    scratch[i] = upper[i] / denom;
    rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) {
    rhs[i] -= scratch[i] * rhs[i + 1];
  }
}

}  // namespace hhmo

namespace hhmo {

TridiagonalFactorization::TridiagonalFactorization(std::vector<double> lower,
                                                   std::vector<double> diag,
                                                   std::vector<double> upper)
    : lower_(std::move(lower)), diag_(std::move(diag)), upper_(std::move(upper)) {
  const std::size_t n = diag_.size();
  if (lower_.size() != n || upper_.size() != n) {
    throw Error(ErrorCode::LengthMismatch, "tridiagonal system with inconsistent lengths");
  }
  inv_pivot_.assign(n, 0.0);
  ratio_.assign(n, 0.0);
  factor_rows(n);
}

void TridiagonalFactorization::factor_rows(std::size_t end) {
  const std::size_t n = diag_.size();
  for (std::size_t i = end; i-- > 0;) {
    const double pivot = i + 1 < n ? diag_[i] - upper_[i] * ratio_[i + 1] : diag_[i];
    inv_pivot_[i] = 1.0 / pivot;
    ratio_[i] = lower_[i] * inv_pivot_[i];
  }
}

void TridiagonalFactorization::set_leading_diagonal(std::span<const double> values) {
  if (values.size() > diag_.size()) {
    throw Error(ErrorCode::LengthMismatch, "diagonal update longer than the system");
  }
  std::copy(values.begin(), values.end(), diag_.begin());
  factor_rows(values.size());
}

void TridiagonalFactorization::solve(std::span<double> rhs) const {
  const std::size_t n = diag_.size();
  if (rhs.size() != n) {
    throw Error(ErrorCode::LengthMismatch, "right-hand side length differs from the system");
  }
  if (n == 0) return;
  rhs[n - 1] *= inv_pivot_[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    rhs[i] = (rhs[i] - upper_[i] * rhs[i + 1]) * inv_pivot_[i];
  }
  for (std::size_t i = 1; i < n; ++i) rhs[i] -= ratio_[i] * rhs[i - 1];
}

}  // namespace hhmo
