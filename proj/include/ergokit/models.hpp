#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <variant>

#include "ergokit/linalg.hpp"

namespace ergokit {

/// x -> constant + matrix * x.
struct AffineMap {
  StateVector constant;
  SquareMatrix matrix;

  StateVector operator()(const StateVector& x) const { return constant + matrix * x; }
};

/// Arbitrary f: R^n -> R^n and g: R^n -> R^{n x n}. The maps are trusted to
/// be total; non-finite output aborts evaluation with the offending state.
struct GenericCallable {
  int dim = 2;
  std::function<StateVector(const StateVector&)> f;
  std::function<SquareMatrix(const StateVector&)> g;
};

/// Bivariate threshold model with piecewise-linear volatility:
///
///   f(x, y) = a + B (x, y)
///   g(x, y) = [[d11 x, d12 y], [d21 x, d22 y]] 1{not C}
///           + [[d31 x, 0], [d32 y, 0]] 1{C}
///           + [[d41, 0], [d42, 0]]
///
/// with C = {x <= 0, y <= 0} (closed).
struct ThresholdAffine2D {
  StateVector a{0.0, 0.0};
  SquareMatrix b = SquareMatrix::zeros(2);
  SquareMatrix d_main = SquareMatrix::zeros(2);  ///< [[d11, d12], [d21, d22]]
  StateVector d_c{0.0, 0.0};                      ///< (d31, d32)
  StateVector d_const{0.0, 0.0};                  ///< (d41, d42)
};

/// X_t = f(X_{t-1}) + (B + (A X_{t-1})(A X_{t-1})^T)^{1/2} e_t.
struct BekkArch {
  std::function<StateVector(const StateVector&)> f;
  /// Present when f is affine; enables the analytic drift envelope.
  std::optional<AffineMap> affine_f;
  SquareMatrix a;
  SquareMatrix b;  ///< symmetric positive semidefinite
};

class ModelSpec {
 public:
  using Variant = std::variant<GenericCallable, ThresholdAffine2D, BekkArch>;

  static ModelSpec generic(GenericCallable m);
  static ModelSpec threshold(ThresholdAffine2D m);
  static ModelSpec bekk(BekkArch m);
  static ModelSpec bekk_affine(AffineMap f, SquareMatrix a, SquareMatrix b);

  int dim() const noexcept { return dim_; }
  std::string_view kind() const;
  const Variant& variant() const noexcept { return variant_; }

  const ThresholdAffine2D* as_threshold() const { return std::get_if<ThresholdAffine2D>(&variant_); }
  const BekkArch* as_bekk() const { return std::get_if<BekkArch>(&variant_); }

 private:
  ModelSpec(Variant v, int dim) : variant_(std::move(v)), dim_(dim) {}
  Variant variant_;
  int dim_;
};

enum class RegionTag {
  c,
  complement_of_c,
  d1,
  d2,
  on_l,
  off_l,
  everywhere_singular,
  everywhere_regular,
};
std::string_view to_string(RegionTag tag);

StateVector eval_f(const ModelSpec& m, const StateVector& x);
SquareMatrix eval_g(const ModelSpec& m, const StateVector& x);

/// F(x, u) = f(x) + g(x) u.
StateVector step(const ModelSpec& m, const StateVector& x, const StateVector& u);

/// F^t(x0, u_1, ..., u_t); returns x0 when `controls` is empty.
StateVector iterate(const ModelSpec& m, const StateVector& x0, std::span<const StateVector> controls);

/// det(B + (Ax)(Ax)^T) for the 2-D BEKK model, det(g(x)) for the threshold
/// model. For rank-deficient B (|det B| <= 1e-12 (1 + ||B||_F^2)) the BEKK
/// path uses the expanded form
///   b11 (a21 x1 + a22 x2)^2 + b22 (a11 x1 + a12 x2)^2
///     - 2 b12 (a21 x1 + a22 x2)(a11 x1 + a12 x2),
/// otherwise the direct 2 x 2 determinant.
double g_determinant(const ModelSpec& m, const StateVector& x);

/// The two BEKK determinant routes, exposed for cross-checking.
double bekk_determinant_closed_form(const SquareMatrix& a, const SquareMatrix& b, const StateVector& x);
double bekk_determinant_direct(const SquareMatrix& a, const SquareMatrix& b, const StateVector& x);
bool bekk_b_is_singular(const SquareMatrix& b);

/// Where det(B + (Ax)(Ax)^T) vanishes for the 2-D BEKK model.
struct BekkDegeneracy {
  enum class Kind { everywhere_regular, line, everywhere_singular };
  Kind kind = Kind::everywhere_regular;
  /// For Kind::line: L = {x : normal[0] x1 + normal[1] x2 = 0}.
  StateVector normal{0.0, 0.0};
  /// sign(b12) used in the rank-one factorization B = w w^T.
  double sigma = 1.0;
};
std::string_view to_string(BekkDegeneracy::Kind kind);

/// B positive definite -> everywhere_regular. B rank one -> with
/// sigma = sign(b12) (+1 if b12 == 0),
///   c1 = a11 sqrt(b22) - sigma a21 sqrt(b11)
///   c2 = a12 sqrt(b22) - sigma a22 sqrt(b11)
/// and the determinant equals (c1 x1 + c2 x2)^2: a line unless both vanish.
/// B = 0 -> everywhere_singular.
BekkDegeneracy bekk_degeneracy(const SquareMatrix& a, const SquareMatrix& b);

/// Total classification. Threshold: C is closed, D1 = {x = 0, y > 0},
/// D2 = {x > 0, y = 0}, everything else is complement_of_c. BEKK: the
/// degeneracy kind, or on_l / off_l relative to the singular line.
RegionTag classify_region(const ModelSpec& m, const StateVector& x);

}  // namespace ergokit
