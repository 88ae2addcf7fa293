#include "ergokit/models.hpp"

#include <algorithm>
#include <cmath>

#include "ergokit/error.hpp"
#include "ergokit/norms.hpp"

namespace ergokit {

namespace {

void require_dim(const ModelSpec& m, const StateVector& x, const char* what) {
  if (x.dim() != m.dim()) {
    throw Error(ErrorKind::invalid_parameter, std::string(what) + ": state has dimension " +
                                                  std::to_string(x.dim()) + ", model has " +
                                                  std::to_string(m.dim()));
  }
}

void check_2x2(const SquareMatrix& m, const char* name) {
  if (m.dim() != 2) throw Error(ErrorKind::invalid_parameter, std::string(name) + " must be 2 x 2");
  if (!m.all_finite()) throw Error(ErrorKind::invalid_parameter, std::string(name) + " has non-finite entries");
}

void check_pair(const StateVector& v, const char* name) {
  if (v.dim() != 2 || !v.all_finite()) {
    throw Error(ErrorKind::invalid_parameter, std::string(name) + " must be a finite 2-vector");
  }
}

bool in_c(const StateVector& x) { return x[0] <= 0.0 && x[1] <= 0.0; }

SquareMatrix threshold_g(const ThresholdAffine2D& m, const StateVector& x) {
  SquareMatrix g(2);
  if (in_c(x)) {
    g(0, 0) = m.d_c[0] * x[0];
    g(1, 0) = m.d_c[1] * x[1];
  } else {
    g(0, 0) = m.d_main(0, 0) * x[0];
    g(0, 1) = m.d_main(0, 1) * x[1];
    g(1, 0) = m.d_main(1, 0) * x[0];
    g(1, 1) = m.d_main(1, 1) * x[1];
  }
  g(0, 0) += m.d_const[0];
  g(1, 0) += m.d_const[1];
  return g;
}

SquareMatrix bekk_inner(const BekkArch& m, const StateVector& x) {
  const StateVector v = m.a * x;
  return m.b + SquareMatrix::outer(v, v);
}

}  // namespace

ModelSpec ModelSpec::generic(GenericCallable m) {
  if (m.dim < 1 || m.dim > kMaxDim) throw Error(ErrorKind::invalid_parameter, "generic model dimension out of range");
  if (!m.f || !m.g) throw Error(ErrorKind::invalid_parameter, "generic model needs both f and g");
  const int dim = m.dim;
  return ModelSpec(std::move(m), dim);
}

ModelSpec ModelSpec::threshold(ThresholdAffine2D m) {
  check_pair(m.a, "a");
  check_2x2(m.b, "b");
  check_2x2(m.d_main, "d_main");
  check_pair(m.d_c, "d_c");
  check_pair(m.d_const, "d_const");
  // d11 d22 - d12 d21 != 0 is reported by the structural checks rather than
  // enforced here, so degenerate variants can still be simulated.
  return ModelSpec(std::move(m), 2);
}

ModelSpec ModelSpec::bekk(BekkArch m) {
  check_2x2(m.a, "A");
  check_2x2(m.b, "B");
  if (!m.f) throw Error(ErrorKind::invalid_parameter, "BEKK model needs an autoregressive map f");
  // Validates symmetry and positive semidefiniteness; throws not_psd.
  (void)psd_sqrt(m.b);
  return ModelSpec(std::move(m), 2);
}

ModelSpec ModelSpec::bekk_affine(AffineMap f, SquareMatrix a, SquareMatrix b) {
  check_pair(f.constant, "f.constant");
  check_2x2(f.matrix, "f.matrix");
  BekkArch m;
  m.f = f;
  m.affine_f = std::move(f);
  m.a = std::move(a);
  m.b = std::move(b);
  return bekk(std::move(m));
}

std::string_view ModelSpec::kind() const {
  switch (variant_.index()) {
    case 0: return "generic";
    case 1: return "threshold";
    default: return "bekk";
  }
}

std::string_view to_string(RegionTag tag) {
  switch (tag) {
    case RegionTag::c: return "C";
    case RegionTag::complement_of_c: return "complement_of_C";
    case RegionTag::d1: return "D1";
    case RegionTag::d2: return "D2";
    case RegionTag::on_l: return "on_L";
    case RegionTag::off_l: return "off_L";
    case RegionTag::everywhere_singular: return "everywhere_singular";
    case RegionTag::everywhere_regular: return "everywhere_regular";
  }
  return "unknown";
}

std::string_view to_string(BekkDegeneracy::Kind kind) {
  switch (kind) {
    case BekkDegeneracy::Kind::everywhere_regular: return "everywhere_regular";
    case BekkDegeneracy::Kind::line: return "line";
    case BekkDegeneracy::Kind::everywhere_singular: return "everywhere_singular";
  }
  return "unknown";
}

StateVector eval_f(const ModelSpec& m, const StateVector& x) {
  require_dim(m, x, "eval_f");
  StateVector y = std::visit(
      [&x](const auto& v) -> StateVector {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ThresholdAffine2D>) {
          return v.a + v.b * x;
        } else if constexpr (std::is_same_v<T, BekkArch>) {
          return v.affine_f ? (*v.affine_f)(x) : v.f(x);
        } else {
          return v.f(x);
        }
      },
      m.variant());
  if (y.dim() != m.dim() || !y.all_finite()) {
    throw Error(ErrorKind::model_evaluation, "f returned " + y.to_string() + " at state " + x.to_string());
  }
  return y;
}

SquareMatrix eval_g(const ModelSpec& m, const StateVector& x) {
  require_dim(m, x, "eval_g");
  SquareMatrix g = std::visit(
      [&x](const auto& v) -> SquareMatrix {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ThresholdAffine2D>) {
          return threshold_g(v, x);
        } else if constexpr (std::is_same_v<T, BekkArch>) {
          return psd_sqrt(bekk_inner(v, x));
        } else {
          return v.g(x);
        }
      },
      m.variant());
  if (g.dim() != m.dim() || !g.all_finite()) {
    throw Error(ErrorKind::model_evaluation, "g returned " + g.to_string() + " at state " + x.to_string());
  }
  return g;
}

StateVector step(const ModelSpec& m, const StateVector& x, const StateVector& u) {
  require_dim(m, u, "step control");
  return eval_f(m, x) + eval_g(m, x) * u;
}

StateVector iterate(const ModelSpec& m, const StateVector& x0, std::span<const StateVector> controls) {
  require_dim(m, x0, "iterate");
  StateVector x = x0;
  for (const StateVector& u : controls) x = step(m, x, u);
  return x;
}

bool bekk_b_is_singular(const SquareMatrix& b) {
  const double fro = frobenius_norm(b);
  return std::abs(determinant(b)) <= 1e-12 * (1.0 + fro * fro);
}

double bekk_determinant_closed_form(const SquareMatrix& a, const SquareMatrix& b, const StateVector& x) {
  const double v1 = a(0, 0) * x[0] + a(0, 1) * x[1];
  const double v2 = a(1, 0) * x[0] + a(1, 1) * x[1];
  return b(0, 0) * v2 * v2 + b(1, 1) * v1 * v1 - 2.0 * b(0, 1) * v2 * v1;
}

double bekk_determinant_direct(const SquareMatrix& a, const SquareMatrix& b, const StateVector& x) {
  const StateVector v = a * x;
  return determinant(b + SquareMatrix::outer(v, v));
}

double g_determinant(const ModelSpec& m, const StateVector& x) {
  require_dim(m, x, "g_determinant");
  if (const auto* t = m.as_threshold()) return determinant(threshold_g(*t, x));
  if (const auto* k = m.as_bekk()) {
    return bekk_b_is_singular(k->b) ? bekk_determinant_closed_form(k->a, k->b, x)
                                    : bekk_determinant_direct(k->a, k->b, x);
  }
  throw Error(ErrorKind::unsupported_model, "g_determinant supports only the threshold and BEKK models");
}

BekkDegeneracy bekk_degeneracy(const SquareMatrix& a, const SquareMatrix& b) {
  check_2x2(a, "A");
  check_2x2(b, "B");
  (void)psd_sqrt(b);

  BekkDegeneracy out;
  if (!bekk_b_is_singular(b)) {
    out.kind = BekkDegeneracy::Kind::everywhere_regular;
    return out;
  }
  const double fro_b = frobenius_norm(b);
  if (fro_b <= 1e-12) {
    // B = 0: g(x) = (Ax)(Ax)^T has rank at most one everywhere.
    out.kind = BekkDegeneracy::Kind::everywhere_singular;
    return out;
  }
  out.sigma = b(0, 1) < 0.0 ? -1.0 : 1.0;
  const double r11 = std::sqrt(std::max(0.0, b(0, 0)));
  const double r22 = std::sqrt(std::max(0.0, b(1, 1)));
  const double c1 = a(0, 0) * r22 - out.sigma * a(1, 0) * r11;
  const double c2 = a(0, 1) * r22 - out.sigma * a(1, 1) * r11;

  double scale = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) scale = std::max(scale, std::abs(a(i, j)));
  const double tol = 1e-12 * (1.0 + scale * std::max(r11, r22));
  if (std::abs(c1) <= tol && std::abs(c2) <= tol) {
    out.kind = BekkDegeneracy::Kind::everywhere_singular;
    return out;
  }
  out.kind = BekkDegeneracy::Kind::line;
  out.normal = StateVector{c1, c2};
  return out;
}

RegionTag classify_region(const ModelSpec& m, const StateVector& x) {
  require_dim(m, x, "classify_region");
  if (m.as_threshold()) {
    if (in_c(x)) return RegionTag::c;
    if (x[0] == 0.0 && x[1] > 0.0) return RegionTag::d1;
    if (x[0] > 0.0 && x[1] == 0.0) return RegionTag::d2;
    return RegionTag::complement_of_c;
  }
  if (const auto* k = m.as_bekk()) {
    const BekkDegeneracy deg = bekk_degeneracy(k->a, k->b);
    switch (deg.kind) {
      case BekkDegeneracy::Kind::everywhere_regular: return RegionTag::everywhere_regular;
      case BekkDegeneracy::Kind::everywhere_singular: return RegionTag::everywhere_singular;
      case BekkDegeneracy::Kind::line: {
        const double t1 = deg.normal[0] * x[0];
        const double t2 = deg.normal[1] * x[1];
        return std::abs(t1 + t2) <= 1e-10 * (std::abs(t1) + std::abs(t2)) ? RegionTag::on_l : RegionTag::off_l;
      }
    }
  }
  throw Error(ErrorKind::unsupported_model, "classify_region supports only the threshold and BEKK models");
}

}  // namespace ergokit
