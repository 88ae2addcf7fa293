#include "ergokit/noise.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include "ergokit/error.hpp"
#include "ergokit/quadrature.hpp"

namespace ergokit {

namespace detail {
struct NormalizerCache {
  std::once_flag once;
  double z = 0.0;
};
}  // namespace detail

namespace {

double expol2_log_coordinate(double u) {
  const double w = u * u - 1.0;
  return -w * w;
}

double expol2_coordinate(Rng& rng) {
  for (std::uint64_t tries = 0; tries < kMaxProposalsPerDraw; ++tries) {
    const double u = rng.uniform(-kExpol2SamplerHalfwidth, kExpol2SamplerHalfwidth);
    // Envelope constant is exactly 1: the unnormalized density peaks at u = +-1.
    if (rng.uniform01() < std::exp(expol2_log_coordinate(u))) return u;
  }
  throw Error(ErrorKind::sampler_misconfiguration, "Expol2 rejection loop exhausted");
}

StateVector custom_draw(const BoundedCustomDensity& c, Rng& rng) {
  StateVector x(c.dim);
  for (std::uint64_t tries = 0; tries < kMaxProposalsPerDraw; ++tries) {
    for (int i = 0; i < c.dim; ++i) x[i] = rng.uniform(-c.box_halfwidth, c.box_halfwidth);
    const double p = std::exp(c.log_unnormalized_density(x));
    if (!(p <= c.envelope_constant)) {
      std::ostringstream os;
      os.precision(17);
      os << "unnormalized density " << p << " exceeds envelope " << c.envelope_constant << " at "
         << x.to_string();
      throw Error(ErrorKind::sampler_misconfiguration, os.str());
    }
    if (rng.uniform01() * c.envelope_constant < p) return x;
  }
  throw Error(ErrorKind::sampler_misconfiguration,
              "rejection sampler exceeded " + std::to_string(kMaxProposalsPerDraw) + " proposals for one draw");
}

/// Integral over [lo, hi] split at 0 when 0 is interior; |u|-type integrands
/// have a kink there.
double integrate_split(const std::function<double(double)>& f, double lo, double hi, double tol,
                       std::uint64_t* evals) {
  QuadratureResult total{};
  if (lo < 0.0 && hi > 0.0) {
    const auto left = adaptive_simpson(f, lo, 0.0, 0.5 * tol);
    const auto right = adaptive_simpson(f, 0.0, hi, 0.5 * tol);
    total = {left.value + right.value, left.evaluations + right.evaluations};
  } else {
    total = adaptive_simpson(f, lo, hi, tol);
  }
  if (evals) *evals += total.evaluations;
  return total.value;
}

/// Per-coordinate normalized density and its integration half-width, for
/// separable specs.
struct Marginal {
  std::function<double(double)> pdf;
  double halfwidth;
};

double custom_coordinate_normalizer(const BoundedCustomDensity& c) {
  std::call_once(c.cache->once, [&] {
    const auto f = [&](double u) { return std::exp(c.coordinate_log_density(u)); };
    c.cache->z = integrate_split(f, -c.box_halfwidth, c.box_halfwidth, kQuadratureTol * 1e-3, nullptr);
  });
  return c.cache->z;
}

double custom_joint_normalizer(const BoundedCustomDensity& c) {
  if (c.dim > 2) {
    throw Error(ErrorKind::unsupported_method,
                "normalizing a non-separable custom density needs dim <= 2, got " + std::to_string(c.dim));
  }
  std::call_once(c.cache->once, [&] {
    const double h = c.box_halfwidth;
    if (c.dim == 1) {
      c.cache->z = integrate_split([&](double u) { return std::exp(c.log_unnormalized_density(StateVector{u})); },
                                   -h, h, kQuadratureTol, nullptr);
      return;
    }
    const auto outer = [&](double u) {
      return integrate_split(
          [&](double v) { return std::exp(c.log_unnormalized_density(StateVector{u, v})); }, -h, h,
          kQuadratureTol, nullptr);
    };
    c.cache->z = integrate_split(outer, -h, h, kQuadratureTol, nullptr);
  });
  return c.cache->z;
}

Marginal marginal_of(const NoiseSpec& spec) {
  return std::visit(
      [](const auto& v) -> Marginal {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, StdGaussian>) {
          return {[](double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi); },
                  kGaussianQuadratureHalfwidth};
        } else if constexpr (std::is_same_v<T, Expol2>) {
          const double z = expol2_normalizer();
          return {[z](double u) { return std::exp(expol2_log_coordinate(u)) / z; }, kExpol2QuadratureHalfwidth};
        } else {
          if (!v.coordinate_log_density) {
            throw Error(ErrorKind::unsupported_method, "quadrature requires a separable density");
          }
          const double z = custom_coordinate_normalizer(v);
          const auto& log_pdf = v.coordinate_log_density;
          const double h = v.box_halfwidth;
          return {[log_pdf, z, h](double u) { return std::abs(u) > h ? 0.0 : std::exp(log_pdf(u)) / z; }, h};
        }
      },
      spec.variant());
}

MomentEstimate quadrature_moment(const NoiseSpec& spec, SExponent s, double tol) {
  const Marginal m = marginal_of(spec);
  const int n = spec.dim();
  const double p = s.value();
  MomentEstimate est{0.0, 0.0, MomentMethod::quadrature, 0, p};

  if (p <= 1.0) {
    // sum_i |e_i|^s has expectation n * E|e_1|^s under i.i.d. coordinates.
    const auto f = [&](double u) { return std::pow(std::abs(u), p) * m.pdf(u); };
    est.value = n * integrate_split(f, -m.halfwidth, m.halfwidth, tol, &est.sample_count);
    return est;
  }
  if (n > 2) {
    throw Error(ErrorKind::unsupported_method,
                "quadrature for s > 1 is limited to dimension <= 2, got " + std::to_string(n));
  }
  if (n == 1) {
    const auto f = [&](double u) { return std::abs(u) * m.pdf(u); };
    est.value = integrate_split(f, -m.halfwidth, m.halfwidth, tol, &est.sample_count);
    return est;
  }
  const auto outer = [&](double u) {
    const double au = std::pow(std::abs(u), p);
    const double pu = m.pdf(u);
    if (pu == 0.0) return 0.0;
    const auto inner = [&](double v) { return std::pow(au + std::pow(std::abs(v), p), 1.0 / p) * m.pdf(v); };
    return pu * integrate_split(inner, -m.halfwidth, m.halfwidth, tol, &est.sample_count);
  };
  est.value = integrate_split(outer, -m.halfwidth, m.halfwidth, tol, &est.sample_count);
  return est;
}

MomentEstimate analytic_moment(const NoiseSpec& spec, SExponent s) {
  const auto* g = std::get_if<StdGaussian>(&spec.variant());
  if (!g) throw Error(ErrorKind::unsupported_method, "closed-form moments exist only for Gaussian noise");
  const double n = g->dim;
  const double p = s.value();
  MomentEstimate est{0.0, 0.0, MomentMethod::analytic, 0, p};
  if (p == 2.0) {
    // Mean of a chi variable with n degrees of freedom.
    est.value = std::sqrt(2.0) * std::exp(std::lgamma((n + 1.0) / 2.0) - std::lgamma(n / 2.0));
  } else if (p <= 1.0) {
    est.value = n * std::pow(2.0, p / 2.0) * std::tgamma((p + 1.0) / 2.0) / std::sqrt(std::numbers::pi);
  } else {
    throw Error(ErrorKind::unsupported_method, "no closed form for Gaussian moments with 1 < s != 2");
  }
  return est;
}

MomentEstimate monte_carlo_moment(const NoiseSpec& spec, SExponent s, const MomentBudget& budget) {
  if (budget.samples < 2) throw Error(ErrorKind::invalid_parameter, "Monte Carlo needs at least 2 samples");
  Rng rng(budget.seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::uint64_t i = 0; i < budget.samples; ++i) {
    const double v = vector_s_norm(draw(spec, rng), s);
    sum += v;
    sum_sq += v * v;
  }
  const double count = static_cast<double>(budget.samples);
  const double mean = sum / count;
  const double var = std::max(0.0, (sum_sq - count * mean * mean) / (count - 1.0));
  return {mean, std::sqrt(var / count), MomentMethod::monte_carlo, budget.samples, s.value()};
}

}  // namespace

NoiseSpec NoiseSpec::gaussian(int dim) {
  if (dim < 1 || dim > kMaxDim) throw Error(ErrorKind::invalid_parameter, "Gaussian noise dimension out of range");
  return NoiseSpec(StdGaussian{dim});
}

NoiseSpec NoiseSpec::expol2() { return NoiseSpec(Expol2{}); }

NoiseSpec NoiseSpec::custom(BoundedCustomDensity density) {
  if (density.dim < 1 || density.dim > kMaxDim) {
    throw Error(ErrorKind::invalid_parameter, "custom noise dimension out of range");
  }
  if (!density.log_unnormalized_density) {
    throw Error(ErrorKind::invalid_parameter, "custom noise needs a log density");
  }
  if (!(density.box_halfwidth > 0.0) || !(density.envelope_constant > 0.0)) {
    throw Error(ErrorKind::invalid_parameter, "custom noise box half-width and envelope must be positive");
  }
  density.cache = std::make_shared<detail::NormalizerCache>();
  return NoiseSpec(std::move(density));
}

int NoiseSpec::dim() const {
  return std::visit(
      [](const auto& v) -> int {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Expol2>) {
          return 2;
        } else {
          return v.dim;
        }
      },
      variant_);
}

std::string_view NoiseSpec::kind() const {
  switch (variant_.index()) {
    case 0: return "gaussian";
    case 1: return "expol2";
    default: return "custom";
  }
}

bool NoiseSpec::separable() const {
  if (const auto* c = std::get_if<BoundedCustomDensity>(&variant_)) return static_cast<bool>(c->coordinate_log_density);
  return true;
}

StateVector draw(const NoiseSpec& spec, Rng& rng) {
  return std::visit(
      [&rng](const auto& v) -> StateVector {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, StdGaussian>) {
          StateVector x(v.dim);
          for (int i = 0; i < v.dim; ++i) x[i] = rng.normal();
          return x;
        } else if constexpr (std::is_same_v<T, Expol2>) {
          const double first = expol2_coordinate(rng);
          const double second = expol2_coordinate(rng);
          return StateVector{first, second};
        } else {
          return custom_draw(v, rng);
        }
      },
      spec.variant());
}

std::vector<StateVector> sample(const NoiseSpec& spec, Rng& rng, std::uint64_t count) {
  if (count < 1) throw Error(ErrorKind::invalid_parameter, "sample count must be >= 1");
  std::vector<StateVector> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) out.push_back(draw(spec, rng));
  return out;
}

double expol2_normalizer() {
  static const double z = integrate_split([](double u) { return std::exp(expol2_log_coordinate(u)); },
                                          -kExpol2QuadratureHalfwidth, kExpol2QuadratureHalfwidth,
                                          kQuadratureTol * 1e-3, nullptr);
  return z;
}

double expol2_box_mass() {
  static const double mass = integrate_split([](double u) { return std::exp(expol2_log_coordinate(u)); },
                                             -kExpol2SamplerHalfwidth, kExpol2SamplerHalfwidth,
                                             kQuadratureTol * 1e-3, nullptr);
  return mass;
}

double density(const NoiseSpec& spec, const StateVector& x) {
  if (x.dim() != spec.dim()) throw Error(ErrorKind::invalid_parameter, "density: dimension mismatch");
  if (const auto* c = std::get_if<BoundedCustomDensity>(&spec.variant())) {
    for (double v : x.values())
      if (std::abs(v) > c->box_halfwidth) return 0.0;
    if (!c->coordinate_log_density) return std::exp(c->log_unnormalized_density(x)) / custom_joint_normalizer(*c);
  }
  const Marginal m = marginal_of(spec);
  double p = 1.0;
  for (double v : x.values()) p *= m.pdf(v);
  return p;
}

std::string_view to_string(MomentMethod method) {
  switch (method) {
    case MomentMethod::quadrature: return "quadrature";
    case MomentMethod::monte_carlo: return "monte_carlo";
    case MomentMethod::analytic: return "analytic";
  }
  return "unknown";
}

MomentMethod moment_method_from_string(std::string_view name) {
  if (name == "quadrature") return MomentMethod::quadrature;
  if (name == "monte_carlo" || name == "mc") return MomentMethod::monte_carlo;
  if (name == "analytic") return MomentMethod::analytic;
  throw Error(ErrorKind::unsupported_method, "unknown moment method '" + std::string(name) + "'");
}

MomentEstimate abs_moment(const NoiseSpec& spec, SExponent s, MomentMethod method, const MomentBudget& budget) {
  switch (method) {
    case MomentMethod::quadrature: return quadrature_moment(spec, s, budget.quad_tol);
    case MomentMethod::monte_carlo: return monte_carlo_moment(spec, s, budget);
    case MomentMethod::analytic: return analytic_moment(spec, s);
  }
  throw Error(ErrorKind::unsupported_method, "unknown moment method");
}

}  // namespace ergokit
