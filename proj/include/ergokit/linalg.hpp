#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>

namespace ergokit {

/// Largest supported state dimension. Every built-in family is 2-D; the cap
/// keeps the fixed-capacity storage small enough to pass by value.
inline constexpr int kMaxDim = 8;

/// A point in R^n, 1 <= n <= kMaxDim, stored inline.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(int dim);
  StateVector(std::initializer_list<double> values);
  explicit StateVector(std::span<const double> values);

  static StateVector zeros(int dim) { return StateVector(dim); }

  int dim() const noexcept { return dim_; }
  double& operator[](int i) noexcept { return data_[static_cast<std::size_t>(i)]; }
  double operator[](int i) const noexcept { return data_[static_cast<std::size_t>(i)]; }

  std::span<double> values() noexcept { return {data_.data(), static_cast<std::size_t>(dim_)}; }
  std::span<const double> values() const noexcept {
    return {data_.data(), static_cast<std::size_t>(dim_)};
  }

  bool all_finite() const noexcept;
  std::string to_string() const;

  StateVector& operator+=(const StateVector& rhs);
  StateVector& operator-=(const StateVector& rhs);
  StateVector& operator*=(double c) noexcept;

  friend bool operator==(const StateVector& a, const StateVector& b) noexcept;

 private:
  int dim_ = 0;
  std::array<double, kMaxDim> data_{};
};

StateVector operator+(StateVector a, const StateVector& b);
StateVector operator-(StateVector a, const StateVector& b);
StateVector operator*(double c, StateVector a);
double dot(const StateVector& a, const StateVector& b);

/// Dense n x n matrix, row-major: entry (i, j) is row i, column j.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(int dim);
  /// Rows in order; every row must have `rows.size()` entries.
  SquareMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static SquareMatrix identity(int dim);
  static SquareMatrix zeros(int dim) { return SquareMatrix(dim); }
  static SquareMatrix diagonal(const StateVector& d);
  static SquareMatrix outer(const StateVector& u, const StateVector& v);

  int dim() const noexcept { return dim_; }
  double& operator()(int i, int j) noexcept { return data_[index(i, j)]; }
  double operator()(int i, int j) const noexcept { return data_[index(i, j)]; }

  StateVector column(int j) const;
  StateVector row(int i) const;
  SquareMatrix transposed() const;
  double trace() const noexcept;
  bool all_finite() const noexcept;
  /// Largest |a_ij - a_ji|.
  double asymmetry() const noexcept;
  std::string to_string() const;

  SquareMatrix& operator+=(const SquareMatrix& rhs);
  SquareMatrix& operator-=(const SquareMatrix& rhs);
  SquareMatrix& operator*=(double c) noexcept;

  friend bool operator==(const SquareMatrix& a, const SquareMatrix& b) noexcept;

 private:
  static constexpr std::size_t index(int i, int j) noexcept {
    return static_cast<std::size_t>(i) * kMaxDim + static_cast<std::size_t>(j);
  }

  int dim_ = 0;
  std::array<double, kMaxDim * kMaxDim> data_{};
};

SquareMatrix operator+(SquareMatrix a, const SquareMatrix& b);
SquareMatrix operator-(SquareMatrix a, const SquareMatrix& b);
SquareMatrix operator*(double c, SquareMatrix a);
SquareMatrix operator*(const SquareMatrix& a, const SquareMatrix& b);
StateVector operator*(const SquareMatrix& a, const StateVector& x);

/// Determinant by partial-pivot LU; intended for the small dimensions here.
double determinant(const SquareMatrix& a);

/// Eigen-decomposition of a symmetric matrix: a = V diag(values) V^T.
struct SymmetricEigen {
  StateVector values;   ///< ascending
  SquareMatrix vectors; ///< column k is the eigenvector of values[k]
};

/// Cyclic Jacobi rotations in fixed sweep order (p < q, row-major), stopping
/// once the off-diagonal Frobenius mass drops below 1e-14 * ||a||_F. Only the
/// upper triangle is read after symmetrization (a + a^T) / 2.
SymmetricEigen symmetric_eigen(const SquareMatrix& a);

}  // namespace ergokit
