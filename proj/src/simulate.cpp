#include "ergokit/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "ergokit/error.hpp"
#include "ergokit/norms.hpp"
#include "ergokit/rng.hpp"

namespace ergokit {

namespace {

const SExponent kL1{1.0};

/// Advances one step; returns false (with a diagnostic) if the new state is
/// unusable.
bool advance(const ModelSpec& model, const NoiseSpec& noise, Rng& rng, StateVector& x, double threshold,
             std::string& diagnostic) {
  const StateVector e = draw(noise, rng);
  try {
    x = step(model, x, e);
  } catch (const Error& err) {
    if (err.kind() != ErrorKind::model_evaluation && err.kind() != ErrorKind::not_psd) throw;
    diagnostic = err.what();
    return false;
  }
  if (!x.all_finite()) {
    diagnostic = "non-finite state " + x.to_string();
    return false;
  }
  if (vector_s_norm(x, kL1) > threshold) {
    diagnostic = "||x||_1 exceeded divergence threshold";
    return false;
  }
  return true;
}

}  // namespace

PathResult simulate_path(const ModelSpec& model, const NoiseSpec& noise, const StateVector& x0, int horizon,
                         std::uint64_t seed, double divergence_threshold) {
  if (horizon < 0) throw Error(ErrorKind::invalid_parameter, "horizon must be >= 0");
  if (noise.dim() != model.dim() || x0.dim() != model.dim()) {
    throw Error(ErrorKind::invalid_parameter, "model, noise and initial state dimensions differ");
  }
  PathResult out;
  out.states.reserve(static_cast<std::size_t>(horizon) + 1);
  out.states.push_back(x0);
  Rng rng(seed);
  StateVector x = x0;
  for (int t = 1; t <= horizon; ++t) {
    if (!advance(model, noise, rng, x, divergence_threshold, out.diagnostic)) {
      out.diverged_at = t;
      break;
    }
    out.states.push_back(x);
  }
  return out;
}

void SimulationConfig::validate() const {
  if (horizon < 1) throw Error(ErrorKind::invalid_parameter, "simulation horizon T must be >= 1");
  if (n_traj < 1) throw Error(ErrorKind::invalid_parameter, "n_traj must be >= 1");
  if (snapshot_times.empty()) throw Error(ErrorKind::invalid_parameter, "snapshot_times must be nonempty");
  if (!std::is_sorted(snapshot_times.begin(), snapshot_times.end()) ||
      std::adjacent_find(snapshot_times.begin(), snapshot_times.end()) != snapshot_times.end()) {
    throw Error(ErrorKind::invalid_parameter, "snapshot_times must be strictly increasing");
  }
  if (snapshot_times.front() < 0 || snapshot_times.back() > horizon) {
    throw Error(ErrorKind::invalid_parameter, "snapshot_times must lie in [0, T]");
  }
  if (!(divergence_threshold > 0.0)) throw Error(ErrorKind::invalid_parameter, "divergence_threshold must be > 0");
  if (threads < 1) throw Error(ErrorKind::invalid_parameter, "threads must be >= 1");
  if (noise.dim() != model.dim()) throw Error(ErrorKind::invalid_parameter, "noise and model dimensions differ");
  if (!init_sampler && x0.dim() != model.dim()) {
    throw Error(ErrorKind::invalid_parameter, "initial state and model dimensions differ");
  }
}

TrajectoryResult run_trajectory(const SimulationConfig& cfg, int id) {
  TrajectoryResult out;
  out.id = id;
  Rng rng(mix64(cfg.master_seed, static_cast<std::uint64_t>(id)));
  StateVector x = cfg.init_sampler ? cfg.init_sampler(rng) : cfg.x0;
  const bool keep = id < cfg.keep_paths;

  out.norm_trace.reserve(static_cast<std::size_t>(cfg.horizon) + 1);
  auto record = [&](int t) {
    out.norm_trace.push_back(vector_s_norm(x, kL1));
    if (keep) out.path.push_back(x);
    if (std::binary_search(cfg.snapshot_times.begin(), cfg.snapshot_times.end(), t)) out.snapshot_states.push_back(x);
  };
  if (!x.all_finite() || vector_s_norm(x, kL1) > cfg.divergence_threshold) {
    out.diverged_at = 0;
    return out;
  }
  record(0);
  std::string diagnostic;
  for (int t = 1; t <= cfg.horizon; ++t) {
    if (!advance(cfg.model, cfg.noise, rng, x, cfg.divergence_threshold, diagnostic)) {
      out.diverged_at = t;
      break;
    }
    record(t);
  }
  return out;
}

double quantile(std::vector<double>& values, double q) {
  if (values.empty()) throw Error(ErrorKind::empty_sample, "quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

EnsembleSummary aggregate_ensemble(const SimulationConfig& cfg, std::vector<TrajectoryResult> results) {
  std::sort(results.begin(), results.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  const int dim = cfg.model.dim();

  EnsembleSummary s;
  s.n_traj = static_cast<int>(results.size());
  s.horizon = cfg.horizon;
  s.dim = dim;
  s.master_seed = cfg.master_seed;
  s.divergence_threshold = cfg.divergence_threshold;
  for (const auto& r : results) {
    s.first_divergence.push_back(r.diverged_at);
    if (r.diverged_at) ++s.diverged_count;
    if (!r.path.empty()) s.paths.push_back(r.path);
  }

  for (std::size_t k = 0; k < cfg.snapshot_times.size(); ++k) {
    SnapshotStats snap;
    snap.t = cfg.snapshot_times[k];
    snap.mean = StateVector(dim);
    snap.second_moment = StateVector(dim);
    std::vector<double> norms;
    for (const auto& r : results) {
      if (k >= r.snapshot_states.size()) continue;
      const StateVector& x = r.snapshot_states[k];
      snap.sample.push_back(x);
      norms.push_back(vector_s_norm(x, kL1));
      for (int i = 0; i < dim; ++i) {
        snap.mean[i] += x[i];
        snap.second_moment[i] += x[i] * x[i];
      }
    }
    snap.contributing = static_cast<int>(snap.sample.size());
    snap.diverged = s.n_traj - snap.contributing;
    if (snap.contributing > 0) {
      const double n = snap.contributing;
      snap.mean *= 1.0 / n;
      snap.second_moment *= 1.0 / n;
      double total = 0.0;
      for (double v : norms) total += v;
      snap.norm_mean = total / n;
      snap.norm_q10 = quantile(norms, 0.1);
      snap.norm_q50 = quantile(norms, 0.5);
      snap.norm_q90 = quantile(norms, 0.9);
    } else {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      snap.norm_mean = snap.norm_q10 = snap.norm_q50 = snap.norm_q90 = nan;
    }
    s.snapshots.push_back(std::move(snap));
  }

  s.mean_norm_trace.assign(static_cast<std::size_t>(cfg.horizon) + 1, 0.0);
  std::vector<int> alive(static_cast<std::size_t>(cfg.horizon) + 1, 0);
  for (const auto& r : results) {
    for (std::size_t t = 0; t < r.norm_trace.size(); ++t) {
      s.mean_norm_trace[t] += r.norm_trace[t];
      ++alive[t];
    }
  }
  for (std::size_t t = 0; t < alive.size(); ++t) {
    s.mean_norm_trace[t] = alive[t] > 0 ? s.mean_norm_trace[t] / alive[t] : std::numeric_limits<double>::quiet_NaN();
  }
  return s;
}

EnsembleSummary simulate_ensemble(const SimulationConfig& cfg) {
  cfg.validate();
  std::vector<TrajectoryResult> results(static_cast<std::size_t>(cfg.n_traj));
  const int workers = std::min(cfg.threads, cfg.n_traj);
  if (workers <= 1) {
    for (int i = 0; i < cfg.n_traj; ++i) results[static_cast<std::size_t>(i)] = run_trajectory(cfg, i);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    {
      std::vector<std::jthread> pool;
      pool.reserve(static_cast<std::size_t>(workers));
      for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (int i = next++; i < cfg.n_traj && !failed; i = next++) {
            try {
              results[static_cast<std::size_t>(i)] = run_trajectory(cfg, i);
            } catch (...) {
              if (!failed.exchange(true)) failure = std::current_exception();
            }
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  return aggregate_ensemble(cfg, std::move(results));
}

KsDistance snapshot_distance(const std::vector<StateVector>& a, const std::vector<StateVector>& b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::empty_sample, "KS distance needs two nonempty samples");
  const int dim = a.front().dim();
  for (const auto* sample : {&a, &b})
    for (const auto& x : *sample)
      if (x.dim() != dim) throw Error(ErrorKind::invalid_parameter, "KS samples have mixed dimensions");

  KsDistance out;
  for (int i = 0; i < dim; ++i) {
    std::vector<double> xa, xb;
    xa.reserve(a.size());
    xb.reserve(b.size());
    for (const auto& x : a) xa.push_back(x[i]);
    for (const auto& x : b) xb.push_back(x[i]);
    std::sort(xa.begin(), xa.end());
    std::sort(xb.begin(), xb.end());
    const double na = static_cast<double>(xa.size());
    const double nb = static_cast<double>(xb.size());
    std::size_t ia = 0, ib = 0;
    double d = 0.0;
    while (ia < xa.size() && ib < xb.size()) {
      const double v = std::min(xa[ia], xb[ib]);
      while (ia < xa.size() && xa[ia] == v) ++ia;
      while (ib < xb.size() && xb[ib] == v) ++ib;
      d = std::max(d, std::abs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb));
    }
    out.per_coordinate.push_back(d);
    out.max = std::max(out.max, d);
  }
  return out;
}

StationaryMoments estimate_stationary_moments(const EnsembleSummary& summary, int burn_in) {
  std::vector<const SnapshotStats*> used;
  for (const auto& snap : summary.snapshots)
    if (snap.t >= burn_in && snap.contributing > 0) used.push_back(&snap);
  if (used.size() < 2) {
    throw Error(ErrorKind::insufficient_snapshots,
                "need at least 2 populated snapshots at or after burn-in " + std::to_string(burn_in));
  }
  const int dim = summary.dim;
  StationaryMoments m;
  m.mean = StateVector(dim);
  m.second_moment = StateVector(dim);
  m.mean_lo = m.mean_hi = used.front()->mean;
  m.second_lo = m.second_hi = used.front()->second_moment;
  for (const SnapshotStats* snap : used) {
    m.mean += snap->mean;
    m.second_moment += snap->second_moment;
    for (int i = 0; i < dim; ++i) {
      m.mean_lo[i] = std::min(m.mean_lo[i], snap->mean[i]);
      m.mean_hi[i] = std::max(m.mean_hi[i], snap->mean[i]);
      m.second_lo[i] = std::min(m.second_lo[i], snap->second_moment[i]);
      m.second_hi[i] = std::max(m.second_hi[i], snap->second_moment[i]);
    }
  }
  m.snapshots_used = static_cast<int>(used.size());
  m.mean *= 1.0 / m.snapshots_used;
  m.second_moment *= 1.0 / m.snapshots_used;
  return m;
}

double running_mean_deviation(const EnsembleSummary& summary, int from, int to) {
  if (from < 0 || to < from || to >= static_cast<int>(summary.mean_norm_trace.size())) {
    throw Error(ErrorKind::invalid_parameter, "running-mean window outside the simulated horizon");
  }
  const double anchor = summary.mean_norm_trace[static_cast<std::size_t>(from)];
  double sum = 0.0;
  double worst = 0.0;
  for (int t = from; t <= to; ++t) {
    sum += summary.mean_norm_trace[static_cast<std::size_t>(t)];
    const double running = sum / (t - from + 1);
    worst = std::max(worst, std::abs(running / anchor - 1.0));
  }
  return worst;
}

}  // namespace ergokit
