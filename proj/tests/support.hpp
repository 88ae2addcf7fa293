#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "ergokit/linalg.hpp"
#include "ergokit/rng.hpp"

namespace ergokit::testing {

inline StateVector random_vector(Rng& rng, int dim, double lo, double hi) {
  StateVector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

inline SquareMatrix random_matrix(Rng& rng, int dim, double lo, double hi) {
  SquareMatrix a(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = rng.uniform(lo, hi);
  return a;
}

// Orthogonal matrix from Gram-Schmidt on a Gaussian matrix.
inline SquareMatrix random_orthogonal(Rng& rng, int dim) {
  SquareMatrix q(dim);
  for (int j = 0; j < dim; ++j) {
    StateVector v(dim);
    for (int i = 0; i < dim; ++i) v[i] = rng.normal();
    for (int k = 0; k < j; ++k) {
      double proj = 0.0;
      for (int i = 0; i < dim; ++i) proj += q(i, k) * v[i];
      for (int i = 0; i < dim; ++i) v[i] -= proj * q(i, k);
    }
    double len = 0.0;
    for (int i = 0; i < dim; ++i) len += v[i] * v[i];
    len = std::sqrt(len);
    for (int i = 0; i < dim; ++i) q(i, j) = v[i] / len;
  }
  return q;
}

// Q diag(lambda) Q^T; roughly a third of the eigenvalues are exactly zero.
inline SquareMatrix random_psd(Rng& rng, int dim, double scale = 10.0) {
  const SquareMatrix q = random_orthogonal(rng, dim);
  StateVector lambda(dim);
  for (int i = 0; i < dim; ++i) lambda[i] = rng.uniform01() < 0.33 ? 0.0 : scale * rng.uniform01();
  SquareMatrix m = q * SquareMatrix::diagonal(lambda) * q.transposed();
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < i; ++j) m(i, j) = m(j, i) = 0.5 * (m(i, j) + m(j, i));
  return m;
}

// Cofactor expansion; independent of the LU path used by the library.
inline double cofactor_determinant(const SquareMatrix& a) {
  const int n = a.dim();
  if (n == 1) return a(0, 0);
  if (n == 2) return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  double det = 0.0;
  for (int j = 0; j < n; ++j) {
    SquareMatrix minor(n - 1);
    for (int i = 1; i < n; ++i) {
      int c = 0;
      for (int k = 0; k < n; ++k) {
        if (k == j) continue;
        minor(i - 1, c++) = a(i, k);
      }
    }
    det += ((j % 2 == 0) ? 1.0 : -1.0) * a(0, j) * cofactor_determinant(minor);
  }
  return det;
}

inline double entrywise_max_diff(const SquareMatrix& a, const SquareMatrix& b) {
  double d = 0.0;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) d = std::max(d, std::abs(a(i, j) - b(i, j)));
  return d;
}

}  // namespace ergokit::testing
