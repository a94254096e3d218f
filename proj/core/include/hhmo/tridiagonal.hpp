#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hhmo {

/// Thomas algorithm for a tridiagonal system.
///
/// `lower[i]` multiplies x[i-1] (lower[0] unused), `upper[i]` multiplies
/// x[i+1] (upper[n-1] unused). The right-hand side is overwritten with the
/// solution. `scratch` must have the same length and is clobbered. No
/// pivoting: intended for diagonally dominant matrices.
void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<double> rhs,
                       std::span<double> scratch);

}  // namespace hhmo

namespace hhmo {

/// Reusable factorization of a fixed tridiagonal matrix, eliminated from the
/// last row upward. Changing the diagonal on rows [0, k) only requires
/// refactoring those rows, since the pivots of later rows do not depend on them.
class TridiagonalFactorization {
 public:
  TridiagonalFactorization() = default;
  TridiagonalFactorization(std::vector<double> lower, std::vector<double> diag,
                           std::vector<double> upper);

  std::size_t size() const { return diag_.size(); }
  const std::vector<double>& diag() const { return diag_; }

  /// Replaces diag[0, values.size()) and refactors those rows.
  void set_leading_diagonal(std::span<const double> values);

  /// Solves in place.
  void solve(std::span<double> rhs) const;

 private:
  void factor_rows(std::size_t end);

  std::vector<double> lower_, diag_, upper_;
  std::vector<double> inv_pivot_, ratio_;
};

}  // namespace hhmo
