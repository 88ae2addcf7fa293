#include "ergokit/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ergokit/error.hpp"
#include "ergokit/io.hpp"

namespace ergokit::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

void prepare_dir(const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw Error(ErrorKind::config, "cannot create output directory '" + out_dir + "'");
}

const SnapshotStats* snapshot_at(const EnsembleSummary& s, int t) {
  for (const auto& snap : s.snapshots)
    if (snap.t == t) return &snap;
  return nullptr;
}

std::string verdict_line(const ErgodicityReport& report, const EnsembleSummary& summary) {
  std::ostringstream os;
  os << "verdict: " << to_string(report.verdict) << " (gamma = " << fmt(report.gamma) << "); diverged "
     << summary.diverged_count << "/" << summary.n_traj << " trajectories";
  if (!summary.snapshots.empty()) {
    const auto& last = summary.snapshots.back();
    os << "; median ||X_" << last.t << "||_1 = " << fmt(last.norm_q50);
  }
  os << "\n";
  return os.str();
}

ErgodicityReport run_check(const ExperimentConfig& config) {
  return build_report(config.build_model(), config.build_noise(), config.build_report_options());
}

void write_bundle(const fs::path& dir, const ExperimentConfig& config, const ErgodicityReport& report,
                  const EnsembleSummary& summary) {
  const Provenance p = provenance_of(config);
  write_file_atomic(dir / "summary.json", dump_with_provenance(to_json(summary), p));
  write_file_atomic(dir / "snapshots.csv", snapshots_csv(summary, p));
  if (!summary.paths.empty()) write_file_atomic(dir / "paths.csv", paths_csv(summary, p));
  write_file_atomic(dir / "verdict.txt", verdict_line(report, summary) + provenance_footer(p));
}

}  // namespace

int exit_code_for(Verdict verdict) {
  switch (verdict) {
    case Verdict::sufficient_condition_met: return kSufficientConditionMet;
    case Verdict::condition_failed: return kConditionFailed;
    case Verdict::inconclusive: return kInconclusive;
  }
  return kError;
}

void apply_seed_override(ExperimentConfig& config) {
  const char* raw = std::getenv("ERGOKIT_SEED");
  if (!raw || !*raw) return;
  char* end = nullptr;
  errno = 0;
  const unsigned long long seed = std::strtoull(raw, &end, 10);
  if (errno != 0 || *end != '\0' || raw[0] == '-') {
    throw Error(ErrorKind::config, std::string("ERGOKIT_SEED must be an unsigned integer, got '") + raw + "'");
  }
  config.simulation.seed = seed;
}

int cmd_check(const std::string& config_path, const std::optional<std::string>& out_path, Streams io) {
  try {
    ExperimentConfig config = load_config(config_path);
    apply_seed_override(config);
    const ErgodicityReport report = run_check(config);
    const std::string text = dump_with_provenance(to_json(report), provenance_of(config));
    io.out << text;
    if (out_path) write_file_atomic(*out_path, text);
    return exit_code_for(report.verdict);
  } catch (const std::exception& err) {
    io.err << "ergokit check: " << err.what() << "\n";
    return kError;
  }
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, int threads, Streams io) {
  try {
    ExperimentConfig config = load_config(config_path);
    apply_seed_override(config);
    prepare_dir(out_dir);
    const EnsembleSummary summary = simulate_ensemble(config.build_simulation(threads));
    ErgodicityReport report;
    try {
      report = run_check(config);
    } catch (const Error& err) {
      report.verdict = Verdict::inconclusive;
      report.gamma = std::nan("");
      report.notes.push_back(std::string("check unavailable: ") + err.what());
    }
    write_bundle(out_dir, config, report, summary);
    io.out << verdict_line(report, summary);
    return 0;
  } catch (const std::exception& err) {
    io.err << "ergokit simulate: " << err.what() << "\n";
    return kError;
  }
}

int cmd_moments(const MomentsArgs& args, Streams io) {
  try {
    NoiseSpec noise = args.noise == "expol2"     ? NoiseSpec::expol2()
                      : args.noise == "gaussian" ? NoiseSpec::gaussian(args.dim)
                                                 : throw Error(ErrorKind::config, "unknown noise '" + args.noise + "'");
    if (args.noise == "expol2" && args.dim != 2) throw Error(ErrorKind::config, "expol2 noise is two-dimensional");
    MomentBudget budget;
    budget.samples = args.samples;
    budget.seed = args.seed;
    const MomentEstimate m = abs_moment(noise, SExponent(args.s), moment_method_from_string(args.method), budget);
    ordered_json doc = to_json(m);
    doc["noise"] = {{"kind", args.noise}, {"dim", noise.dim()}};
    doc["provenance"] = {{"tool", std::string(kToolName)}, {"version", std::string(kToolVersion)}, {"seed", args.seed}};
    io.out << doc.dump(2) << "\n";
    return 0;
  } catch (const std::exception& err) {
    io.err << "ergokit moments: " << err.what() << "\n";
    return kError;
  }
}

std::vector<Claim> reproduction_claims(const ExperimentConfig& config, const ErgodicityReport& report,
                                       const EnsembleSummary& summary) {
  std::vector<Claim> claims;
  const std::string& name = config.name;
  auto add = [&](std::string description, std::string expected, std::string observed, bool holds) {
    claims.push_back({std::move(description), std::move(expected), std::move(observed), holds});
  };

  if (name == "example2-ergodic") {
    add("drift verdict", "sufficient_condition_met", std::string(to_string(report.verdict)),
        report.verdict == Verdict::sufficient_condition_met);
    add("drift coefficient gamma", "< 1 (reference figure 0.981)", fmt(report.gamma), report.gamma < 1.0);
    add("E||e_1||_1", "about 1.66", fmt(report.noise_moment.value), std::abs(report.noise_moment.value - 1.66) <= 0.02);
    add("divergences at threshold " + fmt(summary.divergence_threshold), "0", std::to_string(summary.diverged_count),
        summary.diverged_count == 0);
    if (summary.horizon >= 1000) {
      const double dev = running_mean_deviation(summary, 1000, summary.horizon);
      add("running mean of ||X_t||_1 over [1000, T] vs its value at t = 1000 (heuristic band)", "within 20%",
          fmt(100.0 * dev, 4) + "%", dev <= 0.2);
    }
    const SnapshotStats* a = snapshot_at(summary, 5000);
    const SnapshotStats* b = snapshot_at(summary, 10'000);
    if (a && b && !a->sample.empty() && !b->sample.empty()) {
      const double ks = snapshot_distance(a->sample, b->sample).max;
      add("KS distance between t = 5000 and t = 10000 snapshots (heuristic band)", "<= 0.15", fmt(ks, 4), ks <= 0.15);
    }
  } else if (name == "example2-unit-root" || name == "example2-variance") {
    add("drift verdict", "condition_failed", std::string(to_string(report.verdict)),
        report.verdict == Verdict::condition_failed);
    const SnapshotStats* s1 = snapshot_at(summary, 100);
    const SnapshotStats* s2 = snapshot_at(summary, 1000);
    const SnapshotStats* s3 = snapshot_at(summary, 10'000);
    if (s1 && s2 && s3) {
      const bool increasing = s1->norm_q50 < s2->norm_q50 && s2->norm_q50 < s3->norm_q50;
      add("median ||X_t||_1 at t = 100, 1000, 10000", "strictly increasing (no limiting distribution)",
          fmt(s1->norm_q50) + ", " + fmt(s2->norm_q50) + ", " + fmt(s3->norm_q50), increasing);
    }
  } else if (name == "bekk-demo") {
    const auto& b = std::get<BekkConfig>(config.model);
    const BekkDegeneracy deg = bekk_degeneracy(b.a, b.b);
    const bool diagonal_line = deg.kind == BekkDegeneracy::Kind::line && deg.normal[0] != 0.0 &&
                               std::abs(deg.normal[0] + deg.normal[1]) <= 1e-12 * std::abs(deg.normal[0]);
    add("degeneracy of det(B + (Ax)(Ax)^T)", "line {x1 = x2}",
        std::string(to_string(deg.kind)) + " with normal (" + fmt(deg.normal[0]) + ", " + fmt(deg.normal[1]) + ")",
        diagonal_line);
    const auto probe = probe_skeleton_reachability(config.build_model(), bekk_line_seeds(deg), 10);
    int worst = 0;
    bool all = !probe.empty();
    for (const auto& p : probe) {
      all = all && p.escaped;
      worst = std::max(worst, p.step);
    }
    add("skeleton escape from the singular line", "every seed within 1 step",
        all ? "all seeds, slowest step " + std::to_string(worst) : "some seeds never escaped", all && worst <= 1);
  }
  return claims;
}

int cmd_reproduce(const std::string& name, const std::string& out_dir, int threads, Streams io) {
  ExperimentConfig config;
  try {
    config = builtin_config(name);
  } catch (const Error& err) {
    io.err << "ergokit reproduce: " << err.what() << "\n";
    return kError;
  }
  try {
    apply_seed_override(config);
    prepare_dir(out_dir);
    const fs::path dir(out_dir);
    const Provenance p = provenance_of(config);
    const ErgodicityReport report = run_check(config);
    const EnsembleSummary summary = simulate_ensemble(config.build_simulation(threads));

    write_file_atomic(dir / "config.json", dump_with_provenance(to_json(config), p));
    write_file_atomic(dir / "report.json", dump_with_provenance(to_json(report), p));
    write_bundle(dir, config, report, summary);

    std::ostringstream text;
    text << "reproduction: " << name << "\n";
    for (const Claim& c : reproduction_claims(config, report, summary)) {
      text << (c.holds ? "[ok]       " : "[mismatch] ") << c.description << ": expected " << c.expected
           << ", observed " << c.observed << "\n";
    }
    text << provenance_footer(p);
    write_file_atomic(dir / "comparison.txt", text.str());
    io.out << text.str();
    return 0;
  } catch (const std::exception& err) {
    io.err << "ergokit reproduce: " << err.what() << "\n";
    return kError;
  }
}

int run(int argc, const char* const* argv, Streams io) {
  CLI::App app{"Simulate nonlinear stochastic difference equations and check drift conditions for geometric ergodicity",
               "ergokit"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_path;
  std::string out_dir;
  int threads = 1;

  auto* check = app.add_subcommand("check", "Run structural checks and the drift criterion for a config");
  check->add_option("config", config_path, "Experiment config (JSON)")->required();
  check->add_option("--out", out_path, "Also write the report to this file");

  auto* simulate = app.add_subcommand("simulate", "Simulate an ensemble and write CSV/JSON summaries");
  simulate->add_option("config", config_path, "Experiment config (JSON)")->required();
  simulate->add_option("--out", out_dir, "Output directory")->required();
  simulate->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  MomentsArgs margs;
  auto* moments = app.add_subcommand("moments", "Estimate E||e_1||_s for a noise law");
  moments->add_option("--noise", margs.noise, "expol2 | gaussian")->check(CLI::IsMember({"expol2", "gaussian"}));
  moments->add_option("--dim", margs.dim, "Noise dimension (gaussian)");
  moments->add_option("--s", margs.s, "Norm exponent s > 0");
  moments->add_option("--method", margs.method, "quadrature | mc | monte_carlo | analytic");
  moments->add_option("--samples", margs.samples, "Monte Carlo draws");
  moments->add_option("--seed", margs.seed, "Monte Carlo seed");

  std::string name;
  auto* reproduce = app.add_subcommand("reproduce", "Run a built-in reproduction bundle");
  reproduce->add_option("name", name, "example2-ergodic | example2-unit-root | example2-variance | bekk-demo")
      ->required();
  reproduce->add_option("--out", out_dir, "Output directory")->required();
  reproduce->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, io.out, io.err);
    return code == 0 ? 0 : kError;
  }

  if (check->parsed()) return cmd_check(config_path, out_path, io);
  if (simulate->parsed()) return cmd_simulate(config_path, out_dir, threads, io);
  if (moments->parsed()) return cmd_moments(margs, io);
  if (reproduce->parsed()) return cmd_reproduce(name, out_dir, threads, io);
  return kError;
}

}  // namespace ergokit::cli
