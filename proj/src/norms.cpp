#include "ergokit/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ergokit/error.hpp"

namespace ergokit {

SExponent::SExponent(double s) : s_(s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    std::ostringstream os;
    os << "s-exponent must be a finite positive number, got " << s;
    throw Error(ErrorKind::invalid_parameter, os.str());
  }
}

double vector_s_norm(const StateVector& x, SExponent s) {
  const double p = s.value();
  double acc = 0.0;
  if (p == 1.0) {
    for (double v : x.values()) acc += std::abs(v);
    return acc;
  }
  if (p == 2.0) {
    // hypot-style scaling so huge states do not overflow the squares.
    double scale = 0.0;
    for (double v : x.values()) scale = std::max(scale, std::abs(v));
    if (scale == 0.0 || !std::isfinite(scale)) return scale;
    for (double v : x.values()) acc += (v / scale) * (v / scale);
    return scale * std::sqrt(acc);
  }
  for (double v : x.values()) acc += std::pow(std::abs(v), p);
  return p < 1.0 ? acc : std::pow(acc, 1.0 / p);
}

double matrix_col_sum_norm(const SquareMatrix& a, SExponent s) {
  double best = 0.0;
  for (int j = 0; j < a.dim(); ++j) best = std::max(best, vector_s_norm(a.column(j), s));
  return best;
}

double frobenius_norm(const SquareMatrix& a) {
  double acc = 0.0;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) acc += a(i, j) * a(i, j);
  return std::sqrt(acc);
}

double operator_norm(const SquareMatrix& a, OperatorNormKind p) {
  const int n = a.dim();
  switch (p) {
    case OperatorNormKind::one: {
      double best = 0.0;
      for (int j = 0; j < n; ++j) {
        double col = 0.0;
        for (int i = 0; i < n; ++i) col += std::abs(a(i, j));
        best = std::max(best, col);
      }
      return best;
    }
    case OperatorNormKind::infinity: {
      double best = 0.0;
      for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) row += std::abs(a(i, j));
        best = std::max(best, row);
      }
      return best;
    }
    case OperatorNormKind::two: {
      const SymmetricEigen eig = symmetric_eigen(a.transposed() * a);
      return std::sqrt(std::max(0.0, eig.values[n - 1]));
    }
  }
  return 0.0;
}

double operator_norm(const SquareMatrix& a, double p) {
  if (p == 1.0) return operator_norm(a, OperatorNormKind::one);
  if (p == 2.0) return operator_norm(a, OperatorNormKind::two);
  if (p == std::numeric_limits<double>::infinity()) return operator_norm(a, OperatorNormKind::infinity);
  std::ostringstream os;
  os << "operator norm only supports p in {1, 2, inf}, got " << p;
  throw Error(ErrorKind::unsupported_parameter, os.str());
}

SquareMatrix psd_sqrt(const SquareMatrix& m, double tol) {
  if (!m.all_finite()) throw Error(ErrorKind::not_psd, "matrix has non-finite entries: " + m.to_string());
  if (m.asymmetry() > tol) throw Error(ErrorKind::not_psd, "matrix is not symmetric: " + m.to_string());

  const int n = m.dim();
  if (n == 1) {
    const double floor = -tol * (1.0 + std::abs(m(0, 0)));
    if (m(0, 0) < floor) throw Error(ErrorKind::not_psd, "negative entry " + m.to_string());
    SquareMatrix s(1);
    s(0, 0) = std::sqrt(std::max(0.0, m(0, 0)));
    return s;
  }

  const SymmetricEigen eig = symmetric_eigen(m);
  const double floor = -tol * (1.0 + frobenius_norm(m));
  // Eigenvalues inside the solver's backward error are zero; their square
  // roots would otherwise inject sqrt(eps)-sized noise.
  double spread = 0.0;
  for (int k = 0; k < n; ++k) spread = std::max(spread, std::abs(eig.values[k]));
  const double negligible = 4.0 * n * std::numeric_limits<double>::epsilon() * spread;
  StateVector roots(n);
  for (int k = 0; k < n; ++k) {
    const double lambda = eig.values[k];
    if (lambda < floor) {
      std::ostringstream os;
      os.precision(17);
      os << "eigenvalue " << lambda << " below tolerance " << floor << " for " << m.to_string();
      throw Error(ErrorKind::not_psd, os.str());
    }
    roots[k] = lambda <= negligible ? 0.0 : std::sqrt(lambda);
  }

  SquareMatrix s(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += eig.vectors(i, k) * roots[k] * eig.vectors(j, k);
      s(i, j) = acc;
      s(j, i) = acc;
    }
  return s;
}

}  // namespace ergokit
