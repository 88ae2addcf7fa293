#pragma once

#include "ergokit/linalg.hpp"

namespace ergokit {

/// Exponent of the s-(pseudo)norm. For s >= 1 this is the usual l_s norm;
/// for 0 < s < 1 the "norm" is sum |x_i|^s without the outer root, which is
/// a pseudometric: the triangle inequality holds, homogeneity does not.
class SExponent {
 public:
  explicit SExponent(double s);

  double value() const noexcept { return s_; }
  bool pseudometric_regime() const noexcept { return s_ <= 1.0; }
  /// Degree h with ||c x||_s = c^h ||x||_s for c > 0.
  double homogeneity() const noexcept { return s_ < 1.0 ? s_ : 1.0; }

  friend bool operator==(SExponent a, SExponent b) noexcept { return a.s_ == b.s_; }

 private:
  double s_;
};

double vector_s_norm(const StateVector& x, SExponent s);

/// max_j ||column_j(A)||_s.
double matrix_col_sum_norm(const SquareMatrix& a, SExponent s);

double frobenius_norm(const SquareMatrix& a);

enum class OperatorNormKind { one, two, infinity };

/// Induced operator norm for p in {1, 2, inf}; p = 2 is the largest
/// singular value from the symmetric eigen-solve of A^T A.
double operator_norm(const SquareMatrix& a, OperatorNormKind p);
/// Same, selecting p numerically; any p other than 1, 2 or +inf throws
/// unsupported_parameter.
double operator_norm(const SquareMatrix& a, double p);

inline constexpr double kPsdSqrtDefaultTol = 1e-10;

/// Unique symmetric positive semidefinite S with S S = M.
///
/// M must be symmetric to within tol (absolute, entrywise). Eigenvalues in
/// [-tol (1 + ||M||_F), 0) are rounding artifacts and are clamped to zero;
/// anything more negative raises not_psd.
SquareMatrix psd_sqrt(const SquareMatrix& m, double tol = kPsdSqrtDefaultTol);

}  // namespace ergokit
