#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "ergokit/ergodicity.hpp"
#include "ergokit/models.hpp"
#include "ergokit/noise.hpp"
#include "ergokit/simulate.hpp"

namespace ergokit {

using ordered_json = nlohmann::ordered_json;

/// BEKK model as it appears in a config: f(x) = constant + matrix x.
struct BekkConfig {
  AffineMap f;
  SquareMatrix a;
  SquareMatrix b;
};

struct NoiseConfig {
  std::string kind = "expol2";  ///< "expol2" | "gaussian"
  int dim = 2;
};

struct SimulationSection {
  int horizon = 10'000;
  int n_traj = 200;
  std::vector<int> snapshots{100, 1000, 5000, 10'000};
  std::uint64_t seed = 20'240'611;
  double divergence_threshold = 1e9;
  StateVector init{0.0, 0.0};
  int dump_paths = 0;
};

struct ShellSection {
  double m = 10.0;
  double r = 100.0;
  std::uint64_t samples = 20'000;
  std::uint64_t seed = 1;
};

struct ChecksSection {
  double s = 1.0;
  EnvelopeChoice envelope = EnvelopeChoice::analytic;
  /// Set when envelope == user; the s field is taken from `s`.
  std::optional<DriftEnvelope> user_envelope;
  MomentMethod moment_method = MomentMethod::quadrature;
  std::uint64_t mc_samples = 1'000'000;
  std::uint64_t mc_seed = 7;
  ShellSection shell;
  std::optional<double> reference_gamma;
  int skeleton_horizon = 10;
};

/// Parsed experiment document:
/// {"name", "model", "noise", "simulation", "checks"}; see README for the
/// field list. Unknown keys are rejected with their JSON path.
struct ExperimentConfig {
  std::string name;
  std::variant<ThresholdAffine2D, BekkConfig> model;
  NoiseConfig noise;
  SimulationSection simulation;
  ChecksSection checks;

  ModelSpec build_model() const;
  NoiseSpec build_noise() const;
  SimulationConfig build_simulation(int threads) const;
  ReportOptions build_report_options() const;
};

/// Throws Error(config) naming the offending path.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Canonical document; parse_config(to_json(c)) reproduces c.
ordered_json to_json(const ExperimentConfig& config);

/// Names accepted by builtin_config.
const std::vector<std::string>& builtin_names();
/// Embedded reproduction configs: example2-ergodic, example2-unit-root,
/// example2-variance, bekk-demo. Throws Error(config) for unknown names.
ExperimentConfig builtin_config(std::string_view name);

}  // namespace ergokit
