#include "ergokit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include "ergokit/error.hpp"

namespace ergokit {

namespace {

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim) {
    throw Error(ErrorKind::invalid_parameter,
                "dimension " + std::to_string(dim) + " outside [1, " + std::to_string(kMaxDim) + "]");
  }
}

void check_same(int a, int b, const char* op) {
  if (a != b) {
    throw Error(ErrorKind::invalid_parameter, std::string("dimension mismatch in ") + op + ": " +
                                                  std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_parameter: return "invalid-parameter";
    case ErrorKind::unsupported_parameter: return "unsupported-parameter";
    case ErrorKind::not_psd: return "not-psd";
    case ErrorKind::sampler_misconfiguration: return "sampler-misconfiguration";
    case ErrorKind::unsupported_method: return "unsupported-method";
    case ErrorKind::model_evaluation: return "model-evaluation";
    case ErrorKind::unsupported_model: return "unsupported-model";
    case ErrorKind::envelope_degenerate: return "envelope-degenerate";
    case ErrorKind::parameter_mismatch: return "parameter-mismatch";
    case ErrorKind::empty_sample: return "empty-sample";
    case ErrorKind::insufficient_snapshots: return "insufficient-snapshots";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

// ---- StateVector ----------------------------------------------------------

StateVector::StateVector(int dim) : dim_(dim) { check_dim(dim); }

StateVector::StateVector(std::initializer_list<double> values)
    : StateVector(std::span<const double>(values.begin(), values.size())) {}

StateVector::StateVector(std::span<const double> values) : dim_(static_cast<int>(values.size())) {
  check_dim(dim_);
  std::copy(values.begin(), values.end(), data_.begin());
}

bool StateVector::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.begin() + dim_, [](double v) { return std::isfinite(v); });
}

std::string StateVector::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (int i = 0; i < dim_; ++i) os << (i ? ", " : "") << (*this)[i];
  os << ')';
  return os.str();
}

StateVector& StateVector::operator+=(const StateVector& rhs) {
  check_same(dim_, rhs.dim_, "vector +");
  for (int i = 0; i < dim_; ++i) (*this)[i] += rhs[i];
  return *this;
}

StateVector& StateVector::operator-=(const StateVector& rhs) {
  check_same(dim_, rhs.dim_, "vector -");
  for (int i = 0; i < dim_; ++i) (*this)[i] -= rhs[i];
  return *this;
}

StateVector& StateVector::operator*=(double c) noexcept {
  for (int i = 0; i < dim_; ++i) (*this)[i] *= c;
  return *this;
}

bool operator==(const StateVector& a, const StateVector& b) noexcept {
  return a.dim_ == b.dim_ && std::equal(a.data_.begin(), a.data_.begin() + a.dim_, b.data_.begin());
}

StateVector operator+(StateVector a, const StateVector& b) { return a += b; }
StateVector operator-(StateVector a, const StateVector& b) { return a -= b; }
StateVector operator*(double c, StateVector a) { return a *= c; }

double dot(const StateVector& a, const StateVector& b) {
  check_same(a.dim(), b.dim(), "dot");
  double acc = 0.0;
  for (int i = 0; i < a.dim(); ++i) acc += a[i] * b[i];
  return acc;
}

// ---- SquareMatrix ---------------------------------------------------------

SquareMatrix::SquareMatrix(int dim) : dim_(dim) { check_dim(dim); }

SquareMatrix::SquareMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : SquareMatrix(static_cast<int>(rows.size())) {
  int i = 0;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != dim_) {
      throw Error(ErrorKind::invalid_parameter, "matrix rows must all have length " + std::to_string(dim_));
    }
    int j = 0;
    for (double v : row) (*this)(i, j++) = v;
    ++i;
  }
}

SquareMatrix SquareMatrix::identity(int dim) {
  SquareMatrix m(dim);
  for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

SquareMatrix SquareMatrix::diagonal(const StateVector& d) {
  SquareMatrix m(d.dim());
  for (int i = 0; i < d.dim(); ++i) m(i, i) = d[i];
  return m;
}

SquareMatrix SquareMatrix::outer(const StateVector& u, const StateVector& v) {
  check_same(u.dim(), v.dim(), "outer");
  SquareMatrix m(u.dim());
  for (int i = 0; i < u.dim(); ++i)
    for (int j = 0; j < u.dim(); ++j) m(i, j) = u[i] * v[j];
  return m;
}

StateVector SquareMatrix::column(int j) const {
  StateVector c(dim_);
  for (int i = 0; i < dim_; ++i) c[i] = (*this)(i, j);
  return c;
}

StateVector SquareMatrix::row(int i) const {
  StateVector r(dim_);
  for (int j = 0; j < dim_; ++j) r[j] = (*this)(i, j);
  return r;
}

SquareMatrix SquareMatrix::transposed() const {
  SquareMatrix t(dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double SquareMatrix::trace() const noexcept {
  double acc = 0.0;
  for (int i = 0; i < dim_; ++i) acc += (*this)(i, i);
  return acc;
}

bool SquareMatrix::all_finite() const noexcept {
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j)
      if (!std::isfinite((*this)(i, j))) return false;
  return true;
}

double SquareMatrix::asymmetry() const noexcept {
  double worst = 0.0;
  for (int i = 0; i < dim_; ++i)
    for (int j = i + 1; j < dim_; ++j) worst = std::max(worst, std::abs((*this)(i, j) - (*this)(j, i)));
  return worst;
}

std::string SquareMatrix::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (int i = 0; i < dim_; ++i) {
    os << (i ? ", [" : "[");
    for (int j = 0; j < dim_; ++j) os << (j ? ", " : "") << (*this)(i, j);
    os << ']';
  }
  os << ']';
  return os.str();
}

SquareMatrix& SquareMatrix::operator+=(const SquareMatrix& rhs) {
  check_same(dim_, rhs.dim_, "matrix +");
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) (*this)(i, j) += rhs(i, j);
  return *this;
}

SquareMatrix& SquareMatrix::operator-=(const SquareMatrix& rhs) {
  check_same(dim_, rhs.dim_, "matrix -");
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) (*this)(i, j) -= rhs(i, j);
  return *this;
}

SquareMatrix& SquareMatrix::operator*=(double c) noexcept {
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) (*this)(i, j) *= c;
  return *this;
}

bool operator==(const SquareMatrix& a, const SquareMatrix& b) noexcept {
  if (a.dim_ != b.dim_) return false;
  for (int i = 0; i < a.dim_; ++i)
    for (int j = 0; j < a.dim_; ++j)
      if (a(i, j) != b(i, j)) return false;
  return true;
}

SquareMatrix operator+(SquareMatrix a, const SquareMatrix& b) { return a += b; }
SquareMatrix operator-(SquareMatrix a, const SquareMatrix& b) { return a -= b; }
SquareMatrix operator*(double c, SquareMatrix a) { return a *= c; }

SquareMatrix operator*(const SquareMatrix& a, const SquareMatrix& b) {
  check_same(a.dim(), b.dim(), "matrix *");
  const int n = a.dim();
  SquareMatrix c(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double aik = a(i, k);
      for (int j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

StateVector operator*(const SquareMatrix& a, const StateVector& x) {
  check_same(a.dim(), x.dim(), "matrix-vector *");
  StateVector y(x.dim());
  for (int i = 0; i < a.dim(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < a.dim(); ++j) acc += a(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

double determinant(const SquareMatrix& a) {
  const int n = a.dim();
  if (n == 1) return a(0, 0);
  if (n == 2) return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  SquareMatrix lu = a;
  double det = 1.0;
  for (int k = 0; k < n; ++k) {
    int pivot = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(lu(i, k)) > std::abs(lu(pivot, k))) pivot = i;
    if (lu(pivot, k) == 0.0) return 0.0;
    if (pivot != k) {
      for (int j = 0; j < n; ++j) std::swap(lu(k, j), lu(pivot, j));
      det = -det;
    }
    det *= lu(k, k);
    for (int i = k + 1; i < n; ++i) {
      const double factor = lu(i, k) / lu(k, k);
      for (int j = k; j < n; ++j) lu(i, j) -= factor * lu(k, j);
    }
  }
  return det;
}

SymmetricEigen symmetric_eigen(const SquareMatrix& a) {
  const int n = a.dim();
  SquareMatrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = 0.5 * (a(i, j) + a(j, i));
  SquareMatrix v = SquareMatrix::identity(n);

  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) total += m(i, j) * m(i, j);
  const double threshold = 1e-14 * std::sqrt(total);

  auto off_mass = [&] {
    double acc = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) acc += 2.0 * m(p, q) * m(p, q);
    return std::sqrt(acc);
  };

  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps && off_mass() > threshold; ++sweep) {
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (apq == 0.0) continue;
        // Rotation angle zeroing m(p, q); the smaller root of t^2 + 2 theta t - 1 = 0.
        const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double mkp = m(k, p);
          const double mkq = m(k, q);
          m(k, p) = c * mkp - s * mkq;
          m(k, q) = s * mkp + c * mkq;
        }
        for (int k = 0; k < n; ++k) {
          const double mpk = m(p, k);
          const double mqk = m(q, k);
          m(p, k) = c * mpk - s * mqk;
          m(q, k) = s * mpk + c * mqk;
        }
        m(p, q) = 0.0;
        m(q, p) = 0.0;
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::array<int, kMaxDim> order{};
  std::iota(order.begin(), order.begin() + n, 0);
  std::stable_sort(order.begin(), order.begin() + n, [&](int x, int y) { return m(x, x) < m(y, y); });

  SymmetricEigen out{StateVector(n), SquareMatrix(n)};
  for (int k = 0; k < n; ++k) {
    out.values[k] = m(order[k], order[k]);
    for (int i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

}  // namespace ergokit
