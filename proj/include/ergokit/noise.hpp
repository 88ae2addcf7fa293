#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ergokit/linalg.hpp"
#include "ergokit/norms.hpp"
#include "ergokit/rng.hpp"

namespace ergokit {

/// Sampler half-width for Expol2: each coordinate is drawn from [-3, 3].
/// The discarded tail is below exp(-64).
inline constexpr double kExpol2SamplerHalfwidth = 3.0;
/// Half-width used for Expol2 normalization and moment quadrature. Wider
/// than the sampler box so the quadrature truncation is strictly smaller.
inline constexpr double kExpol2QuadratureHalfwidth = 4.0;
inline constexpr double kGaussianQuadratureHalfwidth = 10.0;
inline constexpr double kQuadratureTol = 1e-9;
/// Rejection proposals allowed per draw before the sampler gives up.
inline constexpr std::uint64_t kMaxProposalsPerDraw = 1'000'000;

struct StdGaussian {
  int dim = 2;
};

/// Bivariate density proportional to exp(-(x^2 - 1)^2 - (y^2 - 1)^2):
/// i.i.d. coordinates, each bimodal with modes at +-1.
struct Expol2 {};

namespace detail {
struct NormalizerCache;
}

/// User density on the box [-h, h]^dim, sampled by uniform-proposal
/// rejection. Mass outside the box is truncated.
struct BoundedCustomDensity {
  int dim = 2;
  std::function<double(const StateVector&)> log_unnormalized_density;
  double box_halfwidth = 1.0;
  /// Upper bound of exp(log_unnormalized_density) on the box.
  double envelope_constant = 1.0;
  /// When set, the density is the product of exp(coordinate_log_density)
  /// over coordinates, which enables the quadrature moment route.
  std::function<double(double)> coordinate_log_density;

  std::shared_ptr<detail::NormalizerCache> cache;
};

class NoiseSpec {
 public:
  using Variant = std::variant<StdGaussian, Expol2, BoundedCustomDensity>;

  static NoiseSpec gaussian(int dim);
  static NoiseSpec expol2();
  static NoiseSpec custom(BoundedCustomDensity density);

  int dim() const;
  /// "gaussian", "expol2" or "custom".
  std::string_view kind() const;
  bool separable() const;
  const Variant& variant() const noexcept { return variant_; }

 private:
  explicit NoiseSpec(Variant v) : variant_(std::move(v)) {}
  Variant variant_;
};

/// One i.i.d. draw.
StateVector draw(const NoiseSpec& spec, Rng& rng);
std::vector<StateVector> sample(const NoiseSpec& spec, Rng& rng, std::uint64_t count);

/// Normalized density. Expol2 and separable custom densities use cached
/// one-dimensional normalizers; non-separable custom densities of
/// dimension <= 2 are normalized by nested quadrature over the box.
double density(const NoiseSpec& spec, const StateVector& x);

/// Z = integral of exp(-(u^2 - 1)^2) over [-4, 4], computed once per process.
double expol2_normalizer();
/// Unnormalized Expol2 mass inside the sampler box [-3, 3]; the
/// rejection acceptance rate is this divided by 6.
double expol2_box_mass();

enum class MomentMethod { quadrature, monte_carlo, analytic };
std::string_view to_string(MomentMethod method);
MomentMethod moment_method_from_string(std::string_view name);

/// Estimate of E ||e_1||_s.
struct MomentEstimate {
  double value = 0.0;
  double std_error = 0.0;  ///< 0 for quadrature and closed forms
  MomentMethod method = MomentMethod::quadrature;
  /// Draws for Monte Carlo, integrand evaluations for quadrature, 0 for
  /// closed forms.
  std::uint64_t sample_count = 0;
  double s = 1.0;
};

struct MomentBudget {
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 0;
  double quad_tol = kQuadratureTol;
};

/// quadrature: product-rule adaptive Simpson, separable densities only.
/// For s <= 1 the norm splits across coordinates and the integral is
/// one-dimensional; for s > 1 nested integration is used up to dimension 3.
/// monte_carlo: sample mean of ||e||_s with its standard error.
/// analytic: closed forms for StdGaussian with s = 1, s = 2 or s < 1.
MomentEstimate abs_moment(const NoiseSpec& spec, SExponent s, MomentMethod method,
                          const MomentBudget& budget = {});

}  // namespace ergokit
