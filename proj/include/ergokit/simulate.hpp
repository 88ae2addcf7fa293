#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ergokit/models.hpp"
#include "ergokit/noise.hpp"

namespace ergokit {

struct PathResult {
  std::vector<StateVector> states;  ///< states[t] = X_t; shorter than T + 1 when diverged
  std::optional<int> diverged_at;   ///< first t whose state was non-finite or over threshold
  std::string diagnostic;
};

/// X_0 = x0, X_t = f(X_{t-1}) + g(X_{t-1}) e_t with e_t the t-th draw of
/// Rng(seed). A non-finite state (or ||X_t||_1 > divergence_threshold)
/// truncates the path at that step.
PathResult simulate_path(const ModelSpec& model, const NoiseSpec& noise, const StateVector& x0, int horizon,
                         std::uint64_t seed,
                         double divergence_threshold = std::numeric_limits<double>::infinity());

struct SimulationConfig {
  ModelSpec model;
  NoiseSpec noise;
  StateVector x0{0.0, 0.0};
  /// Optional random initial law; drawn from the trajectory's own stream
  /// before any noise.
  std::function<StateVector(Rng&)> init_sampler;
  int horizon = 1000;
  int n_traj = 100;
  std::vector<int> snapshot_times;
  std::uint64_t master_seed = 0;
  double divergence_threshold = 1e9;
  int threads = 1;
  /// Keep full paths of the first `keep_paths` trajectories.
  int keep_paths = 0;

  void validate() const;
};

/// Output of one trajectory of an ensemble; the seed is mix64(master, id).
struct TrajectoryResult {
  int id = 0;
  std::optional<int> diverged_at;
  std::vector<StateVector> snapshot_states;  ///< one per snapshot time reached before divergence
  std::vector<double> norm_trace;            ///< ||X_t||_1 for t = 0 .. last finite step
  std::vector<StateVector> path;             ///< only when id < keep_paths
};

TrajectoryResult run_trajectory(const SimulationConfig& cfg, int id);

struct SnapshotStats {
  int t = 0;
  int contributing = 0;
  int diverged = 0;  ///< diverged at or before t; contributing + diverged = n_traj
  StateVector mean;
  StateVector second_moment;
  double norm_mean = 0.0;
  double norm_q10 = 0.0;
  double norm_q50 = 0.0;
  double norm_q90 = 0.0;
  std::vector<StateVector> sample;  ///< contributing states in trajectory order
};

struct EnsembleSummary {
  int n_traj = 0;
  int horizon = 0;
  int dim = 0;
  std::uint64_t master_seed = 0;
  double divergence_threshold = 0.0;
  int diverged_count = 0;
  std::vector<std::optional<int>> first_divergence;  ///< per trajectory
  std::vector<SnapshotStats> snapshots;
  /// Ensemble mean of ||X_t||_1 over trajectories alive at t, t = 0 .. T.
  std::vector<double> mean_norm_trace;
  std::vector<std::vector<StateVector>> paths;  ///< kept paths, by trajectory id
};

/// Trajectories are reduced in id order whatever order they arrive in, so
/// the summary does not depend on scheduling or thread count.
EnsembleSummary aggregate_ensemble(const SimulationConfig& cfg, std::vector<TrajectoryResult> results);

/// Runs cfg.n_traj trajectories on cfg.threads workers and aggregates them.
EnsembleSummary simulate_ensemble(const SimulationConfig& cfg);

struct KsDistance {
  double max = 0.0;
  std::vector<double> per_coordinate;
};

/// Two-sample Kolmogorov-Smirnov statistic of each coordinate's marginal.
KsDistance snapshot_distance(const std::vector<StateVector>& a, const std::vector<StateVector>& b);

struct StationaryMoments {
  StateVector mean;
  StateVector second_moment;
  StateVector mean_lo, mean_hi;
  StateVector second_lo, second_hi;
  int snapshots_used = 0;
};

/// Averages snapshot statistics with t >= burn_in; the band is the min/max
/// across those snapshots. Needs at least two usable snapshots.
StationaryMoments estimate_stationary_moments(const EnsembleSummary& summary, int burn_in);

/// Largest |running_mean(t) / trace[from] - 1| for t in [from, to], where
/// running_mean(t) is the time average of mean_norm_trace over [from, t].
double running_mean_deviation(const EnsembleSummary& summary, int from, int to);

/// Type-7 (linear interpolation) sample quantile; `values` is sorted in place.
double quantile(std::vector<double>& values, double q);

}  // namespace ergokit
