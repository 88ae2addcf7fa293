#include "ergokit/ergodicity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ergokit/error.hpp"

namespace ergokit {

namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double nonzero_tolerance(std::initializer_list<double> coefficients) {
  double biggest = 0.0;
  for (double c : coefficients) biggest = std::max(biggest, std::abs(c));
  return 1e-12 * (1.0 + biggest);
}

struct Line {
  double intercept;
  double slope;
};

/// Least-mean linear upper bound of the cloud {(r_i, y_i)} over [lo, hi].
Line fit_upper_envelope(std::vector<std::pair<double, double>> pts, double lo, double hi, const char* what) {
  if (std::all_of(pts.begin(), pts.end(), [](const auto& p) { return p.second == 0.0; })) {
    throw Error(ErrorKind::envelope_degenerate, std::string("every sampled ") + what + " value is zero");
  }
  std::sort(pts.begin(), pts.end());

  // Andrew's monotone chain, upper half only.
  std::vector<std::pair<double, double>> hull;
  for (const auto& p : pts) {
    while (!hull.empty() && hull.back().first == p.first) hull.pop_back();
    while (hull.size() >= 2) {
      const auto& o = hull[hull.size() - 2];
      const auto& a = hull.back();
      const double cross = (a.first - o.first) * (p.second - o.second) - (a.second - o.second) * (p.first - o.first);
      if (cross >= 0.0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(p);
  }

  double max_y = 0.0;
  double max_ratio = 0.0;
  for (const auto& [r, y] : pts) {
    max_y = std::max(max_y, y);
    max_ratio = std::max(max_ratio, y / r);
  }

  Line line{max_y, 0.0};
  if (hull.size() >= 2) {
    const double mid = 0.5 * (lo + hi);
    std::size_t k = 1;
    while (k + 1 < hull.size() && hull[k].first < mid) ++k;
    const auto& p0 = hull[k - 1];
    const auto& p1 = hull[k];
    line.slope = (p1.second - p0.second) / (p1.first - p0.first);
    line.intercept = p0.second - line.slope * p0.first;
  }
  if (line.slope <= kEnvelopeFloor) {
    line.slope = kEnvelopeFloor;
    line.intercept = 0.0;
    for (const auto& [r, y] : pts) line.intercept = std::max(line.intercept, y - line.slope * r);
  }
  if (line.intercept < 0.0) {
    line.intercept = 0.0;
    line.slope = max_ratio;
  }
  return line;
}

double g_scale(const ModelSpec& m) {
  if (const auto* t = m.as_threshold()) {
    double biggest = 0.0;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) biggest = std::max(biggest, std::abs(t->d_main(i, j)));
      biggest = std::max({biggest, std::abs(t->d_c[i]), std::abs(t->d_const[i])});
    }
    return biggest * biggest;
  }
  if (const auto* k = m.as_bekk()) {
    const double fa = frobenius_norm(k->a);
    const double fb = frobenius_norm(k->b);
    return std::max(fb, fa * fa * std::max(1.0, fb));
  }
  return 1.0;
}

double det_g(const ModelSpec& m, const StateVector& x) {
  if (m.as_threshold() || m.as_bekk()) return g_determinant(m, x);
  return determinant(eval_g(m, x));
}

}  // namespace

std::string_view to_string(EnvelopeSource source) {
  switch (source) {
    case EnvelopeSource::analytic_threshold_formula: return "analytic_threshold_formula";
    case EnvelopeSource::analytic_bekk_formula: return "analytic_bekk_formula";
    case EnvelopeSource::user_supplied: return "user_supplied";
    case EnvelopeSource::shell_estimated: return "shell_estimated";
  }
  return "unknown";
}

std::string_view to_string(GNorm norm) { return norm == GNorm::col_sum ? "col_sum" : "frobenius"; }

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::sufficient_condition_met: return "sufficient_condition_met";
    case Verdict::condition_failed: return "condition_failed";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

void DriftEnvelope::validate() const {
  const double values[] = {a_f, b_f, a_g, b_g, m};
  for (double v : values)
    if (!std::isfinite(v)) throw Error(ErrorKind::invalid_parameter, "drift envelope constants must be finite");
  if (a_f < 0.0) throw Error(ErrorKind::invalid_parameter, "drift envelope needs a_f >= 0");
  if (!(b_f > 0.0)) throw Error(ErrorKind::invalid_parameter, "drift envelope needs b_f > 0");
  if (!(a_g > 0.0)) throw Error(ErrorKind::invalid_parameter, "drift envelope needs a_g > 0");
  if (!(b_g > 0.0)) throw Error(ErrorKind::invalid_parameter, "drift envelope needs b_g > 0");
  if (!(m > 0.0)) throw Error(ErrorKind::invalid_parameter, "drift envelope needs M > 0");
}

DriftEnvelope threshold_envelope(const ThresholdAffine2D& t) {
  DriftEnvelope env;
  env.s = SExponent(1.0);
  env.b_f = std::max(std::abs(t.b(0, 0)) + std::abs(t.b(1, 0)), std::abs(t.b(0, 1)) + std::abs(t.b(1, 1)));
  env.b_g = std::max({std::abs(t.d_main(0, 0)) + std::abs(t.d_main(1, 0)), std::abs(t.d_c[0]), std::abs(t.d_c[1]),
                      std::abs(t.d_main(0, 1)) + std::abs(t.d_main(1, 1))});
  env.a_f = std::abs(t.a[0]) + std::abs(t.a[1]);
  env.a_g = std::abs(t.d_const[0]) + std::abs(t.d_const[1]);
  env.m = 1.0;
  env.source = EnvelopeSource::analytic_threshold_formula;
  env.g_norm = GNorm::col_sum;
  env.validate();
  return env;
}

DriftEnvelope bekk_envelope(const BekkArch& k) {
  if (!k.affine_f) {
    throw Error(ErrorKind::unsupported_model, "analytic BEKK envelope needs an affine f; use the shell estimate");
  }
  DriftEnvelope env;
  env.s = SExponent(2.0);
  env.a_f = vector_s_norm(k.affine_f->constant, env.s);
  env.b_f = std::max(kEnvelopeFloor, operator_norm(k.affine_f->matrix, OperatorNormKind::two));
  env.a_g = std::max(kEnvelopeFloor, std::sqrt(std::max(0.0, k.b.trace())));
  env.b_g = std::max(kEnvelopeFloor, frobenius_norm(k.a));
  env.m = 1.0;
  env.source = EnvelopeSource::analytic_bekk_formula;
  env.g_norm = GNorm::frobenius;
  env.validate();
  return env;
}

StateVector sample_shell(Rng& rng, int dim, SExponent s, double inner_m, double outer_r) {
  const double p = s.value();
  const double h = s.homogeneity();
  // Volume of {||x||_s <= rho} grows like rho^(n / h).
  const double k = dim / h;
  const double lo = std::pow(inner_m, k);
  const double hi = std::pow(outer_r, k);
  double rho = std::pow(lo + (hi - lo) * rng.uniform01(), 1.0 / k);
  rho = std::clamp(std::nextafter(rho, outer_r), std::nextafter(inner_m, outer_r), outer_r);

  // Generalized-Gaussian direction, normalized to the unit s-sphere, is
  // distributed by the cone measure.
  StateVector z(dim);
  double mass = 0.0;
  do {
    mass = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double magnitude = std::pow(rng.gamma(1.0 / p), 1.0 / p);
      z[i] = rng.uniform01() < 0.5 ? -magnitude : magnitude;
      mass += std::pow(std::abs(z[i]), p);
    }
  } while (mass == 0.0);
  const double unit = std::pow(mass, 1.0 / p);
  const double radius = std::pow(rho, 1.0 / h);
  for (int i = 0; i < dim; ++i) z[i] = radius * z[i] / unit;
  return z;
}

DriftEnvelope shell_estimate_envelope(const ModelSpec& m, SExponent s, double inner_m, double outer_r,
                                      std::uint64_t n_samples, std::uint64_t seed) {
  if (!(inner_m > 0.0) || !(outer_r > inner_m)) {
    throw Error(ErrorKind::invalid_parameter, "shell estimate needs R > M > 0");
  }
  if (n_samples < 1000) throw Error(ErrorKind::invalid_parameter, "shell estimate needs at least 1000 samples");

  Rng rng(seed);
  std::vector<std::pair<double, double>> f_pts;
  std::vector<std::pair<double, double>> g_pts;
  f_pts.reserve(n_samples);
  g_pts.reserve(n_samples);
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    const StateVector x = sample_shell(rng, m.dim(), s, inner_m, outer_r);
    const double r = vector_s_norm(x, s);
    f_pts.emplace_back(r, vector_s_norm(eval_f(m, x), s));
    g_pts.emplace_back(r, matrix_col_sum_norm(eval_g(m, x), s));
  }
  const Line f_line = fit_upper_envelope(std::move(f_pts), inner_m, outer_r, "f");
  const Line g_line = fit_upper_envelope(std::move(g_pts), inner_m, outer_r, "g");

  DriftEnvelope env;
  env.s = s;
  env.a_f = f_line.intercept;
  env.b_f = f_line.slope;
  env.a_g = std::max(kEnvelopeFloor, g_line.intercept);
  env.b_g = g_line.slope;
  env.m = inner_m;
  env.source = EnvelopeSource::shell_estimated;
  env.g_norm = GNorm::col_sum;
  env.validate();
  return env;
}

double drift_gamma(const DriftEnvelope& env, const MomentEstimate& moment) {
  if (moment.s != env.s.value()) {
    std::ostringstream os;
    os << "moment computed with s = " << moment.s << " but envelope uses s = " << env.s.value();
    throw Error(ErrorKind::parameter_mismatch, os.str());
  }
  env.validate();
  return env.b_f + env.b_g * moment.value;
}

double bekk_gamma(double b_f, const SquareMatrix& a, const MomentEstimate& moment2) {
  if (moment2.s != 2.0) {
    throw Error(ErrorKind::parameter_mismatch, "BEKK gamma needs E||e||_2, got s = " + format_double(moment2.s));
  }
  if (!(b_f >= 0.0) || !std::isfinite(b_f)) throw Error(ErrorKind::invalid_parameter, "b_f must be finite and >= 0");
  return b_f + frobenius_norm(a) * moment2.value;
}

CheckResult check_coefexpol(const ThresholdAffine2D& t) {
  const double d11 = t.d_main(0, 0), d12 = t.d_main(0, 1), d21 = t.d_main(1, 0), d22 = t.d_main(1, 1);
  const double d31 = t.d_c[0], d32 = t.d_c[1], d41 = t.d_const[0], d42 = t.d_const[1];
  const double tol = nonzero_tolerance({d11, d12, d21, d22, d31, d32, d41, d42});
  const double first = d11 * d42 - d21 * d41;
  const double second = d31 * d42 - d32 * d41;

  CheckResult out;
  out.name = "coefexpol";
  out.passed = std::abs(first) > tol && std::abs(second) > tol;
  out.witnesses = {{"d11*d42-d21*d41", first}, {"d31*d42-d32*d41", second}, {"tolerance", tol}};
  out.detail = out.passed ? "both regime determinants nonzero: singular sets are left with positive probability"
                          : "a regime determinant vanishes";
  return out;
}

CheckResult check_main_block_nonsingular(const ThresholdAffine2D& t) {
  const double d11 = t.d_main(0, 0), d12 = t.d_main(0, 1), d21 = t.d_main(1, 0), d22 = t.d_main(1, 1);
  const double tol = nonzero_tolerance({d11, d12, d21, d22});
  const double det = d11 * d22 - d12 * d21;
  CheckResult out;
  out.name = "main_block_nonsingular";
  out.passed = std::abs(det) > tol;
  out.witnesses = {{"d11*d22-d12*d21", det}, {"tolerance", tol}};
  out.detail = out.passed ? "g is nonsingular off C apart from the axes" : "g is singular everywhere off C";
  return out;
}

std::vector<ReachabilityResult> probe_skeleton_reachability(const ModelSpec& m, std::span<const StateVector> seeds,
                                                            int horizon) {
  if (horizon < 1) throw Error(ErrorKind::invalid_parameter, "skeleton horizon must be >= 1");
  const double scale = g_scale(m);
  std::vector<ReachabilityResult> out;
  out.reserve(seeds.size());
  for (const StateVector& seed : seeds) {
    ReachabilityResult r{seed};
    StateVector x = seed;
    for (int t = 1; t <= horizon; ++t) {
      x = eval_f(m, x);
      const double norm2 = dot(x, x);
      if (std::abs(det_g(m, x)) > 1e-8 * (1.0 + norm2 * scale)) {
        r.escaped = true;
        r.step = t;
        break;
      }
    }
    out.push_back(r);
  }
  return out;
}

std::vector<StateVector> bekk_line_seeds(const BekkDegeneracy& deg) {
  if (deg.kind != BekkDegeneracy::Kind::line) return {};
  const double len = std::hypot(deg.normal[0], deg.normal[1]);
  const StateVector dir{-deg.normal[1] / len, deg.normal[0] / len};
  std::vector<StateVector> seeds;
  for (double c : {0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 5.0, -5.0, 10.0, -10.0}) seeds.push_back(c * dir);
  return seeds;
}

DriftRatioEstimate empirical_drift_check(const ModelSpec& m, const NoiseSpec& noise, const StateVector& x,
                                         SExponent s, std::uint64_t n_mc, std::uint64_t seed) {
  if (n_mc < 1000) throw Error(ErrorKind::invalid_parameter, "empirical drift check needs n_mc >= 1000");
  if (noise.dim() != m.dim()) throw Error(ErrorKind::invalid_parameter, "noise and model dimensions differ");
  const StateVector fx = eval_f(m, x);
  const SquareMatrix gx = eval_g(m, x);
  Rng rng(seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::uint64_t i = 0; i < n_mc; ++i) {
    const double v = 1.0 + vector_s_norm(fx + gx * draw(noise, rng), s);
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(n_mc);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
  const double v0 = 1.0 + vector_s_norm(x, s);
  return {mean / v0, std::sqrt(var / n) / v0, n_mc};
}

Verdict decide_verdict(std::span<const CheckResult> structural, double gamma, const DriftEnvelope& env,
                       const MomentEstimate& moment) {
  bool any_gating = false;
  for (const CheckResult& c : structural) {
    if (c.advisory) continue;
    any_gating = true;
    if (!c.passed) return Verdict::condition_failed;
  }
  if (!(gamma < 1.0)) return Verdict::condition_failed;
  if (!any_gating) return Verdict::inconclusive;
  if (env.source == EnvelopeSource::shell_estimated) return Verdict::inconclusive;
  if (moment.method == MomentMethod::monte_carlo && gamma + 3.0 * env.b_g * moment.std_error >= 1.0) {
    return Verdict::inconclusive;
  }
  return Verdict::sufficient_condition_met;
}

ErgodicityReport build_report(const ModelSpec& m, const NoiseSpec& noise, const ReportOptions& options) {
  if (noise.dim() != m.dim()) {
    throw Error(ErrorKind::invalid_parameter, "noise dimension " + std::to_string(noise.dim()) +
                                                  " differs from model dimension " + std::to_string(m.dim()));
  }
  ErgodicityReport report;
  report.reference_gamma = options.reference_gamma;

  if (const auto* t = m.as_threshold()) {
    report.structural.push_back(check_main_block_nonsingular(*t));
    report.structural.push_back(check_coefexpol(*t));
  } else if (const auto* k = m.as_bekk()) {
    const BekkDegeneracy deg = bekk_degeneracy(k->a, k->b);
    CheckResult c;
    c.name = "bekk_degeneracy";
    c.passed = deg.kind != BekkDegeneracy::Kind::everywhere_singular;
    c.witnesses = {{"c1", deg.normal[0]}, {"c2", deg.normal[1]}, {"sigma", deg.sigma}};
    c.detail = std::string(to_string(deg.kind));
    if (deg.kind == BekkDegeneracy::Kind::line) {
      c.detail += ": singular on {" + format_double(deg.normal[0]) + " x1 + " + format_double(deg.normal[1]) +
                  " x2 = 0}";
    }
    report.structural.push_back(c);

    if (deg.kind == BekkDegeneracy::Kind::line) {
      const auto seeds = bekk_line_seeds(deg);
      const auto probe = probe_skeleton_reachability(m, seeds, options.skeleton_horizon);
      CheckResult r;
      r.name = "skeleton_reachability";
      r.advisory = true;
      int escaped = 0;
      int slowest = 0;
      for (const auto& p : probe) {
        if (p.escaped) {
          ++escaped;
          slowest = std::max(slowest, p.step);
        }
      }
      r.passed = escaped == static_cast<int>(probe.size());
      r.witnesses = {{"seeds", static_cast<double>(probe.size())},
                     {"escaped", static_cast<double>(escaped)},
                     {"max_escape_step", static_cast<double>(slowest)}};
      r.detail = "noise-free iteration from points on the singular line; diagnostic, not a proof";
      report.structural.push_back(r);
    }
  } else {
    report.notes.push_back("generic model: no structural checks available, verdict is at most inconclusive");
  }

  {
    CheckResult c;
    c.name = "noise_density_positive";
    if (noise.kind() == "custom") {
      c.passed = false;
      c.advisory = true;
      c.detail = "custom density is supported on a bounded box; positivity everywhere is not established";
    } else {
      c.passed = true;
      c.detail = noise.kind() == "expol2" ? "Expol2 density is positive everywhere (sampler truncates at |u| > 3)"
                                          : "Gaussian density is positive everywhere";
    }
    report.structural.push_back(c);
  }

  switch (options.envelope) {
    case EnvelopeChoice::analytic:
      if (const auto* t = m.as_threshold()) {
        if (options.s.value() != 1.0) {
          throw Error(ErrorKind::parameter_mismatch, "the analytic threshold envelope is stated for s = 1");
        }
        report.envelope = threshold_envelope(*t);
      } else if (const auto* k = m.as_bekk()) {
        if (options.s.value() != 2.0) {
          throw Error(ErrorKind::parameter_mismatch, "the analytic BEKK envelope is stated for s = 2");
        }
        report.envelope = bekk_envelope(*k);
      } else {
        throw Error(ErrorKind::unsupported_model, "no analytic envelope for generic models");
      }
      break;
    case EnvelopeChoice::user:
      if (!options.user_envelope) throw Error(ErrorKind::invalid_parameter, "user envelope requested but missing");
      report.envelope = *options.user_envelope;
      report.envelope.source = EnvelopeSource::user_supplied;
      if (report.envelope.s.value() != options.s.value()) {
        throw Error(ErrorKind::parameter_mismatch, "user envelope s differs from the check s");
      }
      report.envelope.validate();
      break;
    case EnvelopeChoice::shell:
      report.envelope = shell_estimate_envelope(m, options.s, options.shell_m, options.shell_r, options.shell_samples,
                                                options.shell_seed);
      report.notes.push_back("envelope estimated from " + std::to_string(options.shell_samples) +
                             " shell samples; sample-based, not a bound");
      break;
  }

  report.noise_moment = abs_moment(noise, report.envelope.s, options.moment_method, options.moment_budget);
  if (report.envelope.source == EnvelopeSource::analytic_bekk_formula) {
    report.gamma = bekk_gamma(report.envelope.b_f, m.as_bekk()->a, report.noise_moment);
  } else {
    report.gamma = drift_gamma(report.envelope, report.noise_moment);
  }
  if (report.envelope.s.value() > 1.0 && report.envelope.g_norm == GNorm::col_sum) {
    report.notes.push_back(
        "for s > 1 the max-column l_s value of g(x) does not bound ||g(x)e||_s; an induced or Frobenius (s = 2) "
        "bound on g is needed for the drift argument");
  }
  report.verdict = decide_verdict(report.structural, report.gamma, report.envelope, report.noise_moment);
  if (!m.as_threshold() && !m.as_bekk() && report.verdict == Verdict::sufficient_condition_met) report.verdict = Verdict::inconclusive;

  {
    std::ostringstream os;
    os.precision(10);
    os << "noise moment E||e||_s (s = " << report.noise_moment.s << ") = " << report.noise_moment.value << " by "
       << to_string(report.noise_moment.method);
    if (report.noise_moment.method == MomentMethod::monte_carlo) {
      os << " with " << report.noise_moment.sample_count << " draws, standard error "
         << report.noise_moment.std_error;
    }
    report.notes.push_back(os.str());
  }
  report.notes.push_back("envelope source: " + std::string(to_string(report.envelope.source)));
  if (report.reference_gamma) {
    const double ref = *report.reference_gamma;
    std::ostringstream os;
    os.precision(6);
    os << "reference gamma " << ref << " vs formula-derived gamma " << report.gamma << " (difference "
       << ref - report.gamma << "); ";
    if ((ref < 1.0) == (report.gamma < 1.0)) {
      os << "both are on the same side of 1, so the conclusion agrees";
    } else {
      os << "they fall on opposite sides of 1";
    }
    report.notes.push_back(os.str());
  }
  if (report.verdict == Verdict::sufficient_condition_met) {
    report.notes.push_back(
        "structural checks give an irreducible aperiodic T-chain; with gamma < 1 the drift criterion for "
        "V(x) = 1 + ||x||_s yields geometric ergodicity" +
        std::string(report.envelope.s.value() >= 1.0 ? ", and finite stationary moments up to order s" : ""));
  } else if (report.verdict == Verdict::condition_failed) {
    report.notes.push_back("the sufficient condition does not hold; this does not establish non-ergodicity");
  }
  return report;
}

}  // namespace ergokit
