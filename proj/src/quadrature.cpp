#include "ergokit/quadrature.hpp"

#include <cmath>

#include "ergokit/error.hpp"

namespace ergokit {

namespace {

struct Simpson {
  const std::function<double(double)>& f;
  std::uint64_t evaluations = 0;

  double eval(double x) {
    ++evaluations;
    return f(x);
  }

  double recurse(double a, double b, double fa, double fm, double fb, double whole, double tol,
                 int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = eval(lm);
    const double frm = eval(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
  }
};

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                                  double abs_tol, int max_depth) {
  if (!(abs_tol > 0.0)) throw Error(ErrorKind::invalid_parameter, "quadrature tolerance must be positive");
  if (!(hi > lo)) throw Error(ErrorKind::invalid_parameter, "quadrature interval must have hi > lo");
  Simpson s{f};
  // Start from four panels so integrands vanishing at the ends and the
  // midpoint are not mistaken for zero.
  constexpr int kPanels = 4;
  const double width = (hi - lo) / kPanels;
  double total = 0.0;
  for (int k = 0; k < kPanels; ++k) {
    const double a = lo + k * width;
    const double b = (k + 1 == kPanels) ? hi : lo + (k + 1) * width;
    const double fa = s.eval(a);
    const double fb = s.eval(b);
    const double fm = s.eval(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    total += s.recurse(a, b, fa, fm, fb, whole, abs_tol / kPanels, max_depth);
  }
  return {total, s.evaluations};
}

}  // namespace ergokit
