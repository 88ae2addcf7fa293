#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ergokit/models.hpp"
#include "ergokit/noise.hpp"
#include "ergokit/norms.hpp"

namespace ergokit {

enum class EnvelopeSource { analytic_threshold_formula, analytic_bekk_formula, user_supplied, shell_estimated };
std::string_view to_string(EnvelopeSource source);

/// Which matrix norm bounds g: the maximum-column-sum s-norm, or Frobenius
/// (the natural choice for the BEKK volatility with s = 2).
enum class GNorm { col_sum, frobenius };
std::string_view to_string(GNorm norm);

/// Linear growth bounds outside the ball ||x||_s <= M:
///   ||f(x)||_s <= a_f + b_f ||x||_s,   |||g(x)||| <= a_g + b_g ||x||_s.
struct DriftEnvelope {
  SExponent s{1.0};
  double a_f = 0.0;
  double b_f = 0.0;
  double a_g = 0.0;
  double b_g = 0.0;
  double m = 1.0;
  EnvelopeSource source = EnvelopeSource::user_supplied;
  GNorm g_norm = GNorm::col_sum;

  /// Throws invalid_parameter unless all constants are finite, a_f >= 0 and
  /// b_f, a_g, b_g, M > 0.
  void validate() const;
};

/// Positive stand-in for bounds that are exactly zero (constant f, A = 0).
inline constexpr double kEnvelopeFloor = 1e-12;

/// Closed-form envelope for the threshold family with s = 1:
///   b_f = max(|b11| + |b21|, |b12| + |b22|)
///   b_g = max(|d11| + |d21|, |d31|, |d32|, |d12| + |d22|)
///   a_f = ||a||_1, a_g = |d41| + |d42|, M = 1.
DriftEnvelope threshold_envelope(const ThresholdAffine2D& m);

/// Envelope for the BEKK family with an affine f and s = 2:
/// a_f = ||c||_2, b_f = |||F|||_2, a_g = sqrt(tr B), b_g = |||A|||_F.
DriftEnvelope bekk_envelope(const BekkArch& m);

/// Sample-based envelope: x drawn uniformly on {M < ||x||_s <= R}, then the
/// linear bound minimizing its mean over [M, R] (the upper-hull edge of
/// the (||x||_s, ||f(x)||_s) cloud spanning (M + R) / 2), likewise for g.
/// Advisory only: a sampled supremum is not a bound.
DriftEnvelope shell_estimate_envelope(const ModelSpec& m, SExponent s, double inner_m, double outer_r,
                                      std::uint64_t n_samples, std::uint64_t seed);

/// Uniform point on the shell {M < ||x||_s <= R} in dimension n.
StateVector sample_shell(Rng& rng, int dim, SExponent s, double inner_m, double outer_r);

/// gamma = b_f + b_g E||e_1||_s; the moment must use the envelope's s.
double drift_gamma(const DriftEnvelope& env, const MomentEstimate& moment);

/// gamma = b_f + |||A|||_F E||e_1||_2; the moment must use s = 2.
double bekk_gamma(double b_f, const SquareMatrix& a, const MomentEstimate& moment2);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::vector<std::pair<std::string, double>> witnesses;
  std::string detail;
  /// Diagnostic only; does not gate the verdict.
  bool advisory = false;
};

/// d11 d42 - d21 d41 != 0 and d31 d42 - d32 d41 != 0, each compared with
/// 1e-12 (1 + largest coefficient magnitude).
CheckResult check_coefexpol(const ThresholdAffine2D& m);

/// d11 d22 - d12 d21 != 0 under the same tolerance.
CheckResult check_main_block_nonsingular(const ThresholdAffine2D& m);

struct ReachabilityResult {
  StateVector seed;
  bool escaped = false;
  int step = 0;  ///< first t with f^t(seed) regular; 0 when not escaped
};

/// Iterates the noise-free skeleton x -> f(x) from each seed and reports the
/// first t <= horizon with |det g(f^t(x))| > 1e-8 (1 + ||f^t(x)||_2^2 scale),
/// where scale is the squared coefficient size of g. Diagnostic, not a proof.
std::vector<ReachabilityResult> probe_skeleton_reachability(const ModelSpec& m, std::span<const StateVector> seeds,
                                                            int horizon);

/// Points on the singular line of a BEKK model, at several scales around the
/// origin. Empty unless the degeneracy is a line.
std::vector<StateVector> bekk_line_seeds(const BekkDegeneracy& deg);

struct DriftRatioEstimate {
  double ratio = 0.0;  ///< E[V(X_1) | X_0 = x] / V(x), V = 1 + ||.||_s
  double std_error = 0.0;
  std::uint64_t samples = 0;
};

DriftRatioEstimate empirical_drift_check(const ModelSpec& m, const NoiseSpec& noise, const StateVector& x,
                                         SExponent s, std::uint64_t n_mc, std::uint64_t seed);

enum class Verdict { sufficient_condition_met, condition_failed, inconclusive };
std::string_view to_string(Verdict verdict);

struct ErgodicityReport {
  std::vector<CheckResult> structural;
  double gamma = 0.0;
  MomentEstimate noise_moment;
  DriftEnvelope envelope;
  Verdict verdict = Verdict::inconclusive;
  std::optional<double> reference_gamma;
  std::vector<std::string> notes;
};

enum class EnvelopeChoice { analytic, shell, user };

struct ReportOptions {
  SExponent s{1.0};
  EnvelopeChoice envelope = EnvelopeChoice::analytic;
  std::optional<DriftEnvelope> user_envelope;
  MomentMethod moment_method = MomentMethod::quadrature;
  MomentBudget moment_budget{};
  /// Shell sampling for EnvelopeChoice::shell.
  double shell_m = 10.0;
  double shell_r = 100.0;
  std::uint64_t shell_samples = 20'000;
  std::uint64_t shell_seed = 0;
  int skeleton_horizon = 10;
  /// Independently reported gamma to set beside the derived value.
  std::optional<double> reference_gamma;
};

/// Verdict rule: any failing non-advisory check or gamma >= 1 gives
/// condition_failed. Otherwise a shell-estimated envelope, or a Monte Carlo
/// moment whose 3-sigma band reaches 1, gives inconclusive. The remaining
/// case is sufficient_condition_met. gamma >= 1 never implies the chain is
/// not ergodic; the criterion is only sufficient.
Verdict decide_verdict(std::span<const CheckResult> structural, double gamma, const DriftEnvelope& env,
                       const MomentEstimate& moment);

ErgodicityReport build_report(const ModelSpec& m, const NoiseSpec& noise, const ReportOptions& options);

}  // namespace ergokit
