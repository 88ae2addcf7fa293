#pragma once

#include <cstdint>
#include <functional>

namespace ergokit {

struct QuadratureResult {
  double value = 0.0;
  std::uint64_t evaluations = 0;
};

/// Adaptive Simpson with Richardson correction. Refinement is a pure
/// function of the integrand and tolerance, so repeated calls are
/// bit-identical.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                                  double abs_tol, int max_depth = 48);

}  // namespace ergokit
