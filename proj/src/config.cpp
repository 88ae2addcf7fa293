#include "ergokit/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "ergokit/error.hpp"

namespace ergokit {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::config, (path.empty() ? std::string("/") : path) + ": " + what);
}

/// Path-tracking accessor over one JSON object.
class ObjectReader {
 public:
  ObjectReader(const json& node, std::string path, std::set<std::string> allowed)
      : node_(node), path_(std::move(path)) {
    if (!node.is_object()) fail(path_, "expected an object");
    for (const auto& [key, value] : node.items()) {
      if (!allowed.count(key)) fail(path_ + "/" + key, "unknown key");
    }
  }

  bool has(const std::string& key) const { return node_.contains(key); }
  const json& at(const std::string& key) const {
    if (!has(key)) fail(path_ + "/" + key, "missing required key");
    return node_.at(key);
  }
  std::string child(const std::string& key) const { return path_ + "/" + key; }

  double number(const std::string& key) const { return as_number(at(key), child(key)); }
  double number_or(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

  std::int64_t integer(const std::string& key) const { return as_integer(at(key), child(key)); }
  std::int64_t integer_or(const std::string& key, std::int64_t fallback) const {
    return has(key) ? integer(key) : fallback;
  }

  std::uint64_t unsigned_or(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      fail(child(key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::string string(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_string()) fail(child(key), "expected a string");
    return v.get<std::string>();
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(path, "expected a finite number");
    return d;
  }

  static std::int64_t as_integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<std::int64_t>();
  }

 private:
  const json& node_;
  std::string path_;
};

StateVector read_vector(const json& v, const std::string& path, int expected_dim = -1) {
  if (!v.is_array() || v.empty()) fail(path, "expected a nonempty array of numbers");
  if (expected_dim > 0 && static_cast<int>(v.size()) != expected_dim) {
    fail(path, "expected " + std::to_string(expected_dim) + " entries");
  }
  if (static_cast<int>(v.size()) > kMaxDim) fail(path, "too many entries");
  StateVector out(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<int>(i)] = ObjectReader::as_number(v[i], path + "/" + std::to_string(i));
  return out;
}

SquareMatrix read_matrix(const json& v, const std::string& path, int expected_dim) {
  if (!v.is_array() || static_cast<int>(v.size()) != expected_dim) {
    fail(path, "expected " + std::to_string(expected_dim) + " rows");
  }
  SquareMatrix out(expected_dim);
  for (int i = 0; i < expected_dim; ++i) {
    const StateVector row = read_vector(v[static_cast<std::size_t>(i)], path + "/" + std::to_string(i), expected_dim);
    for (int j = 0; j < expected_dim; ++j) out(i, j) = row[j];
  }
  return out;
}

ordered_json vector_json(const StateVector& v) {
  ordered_json out = ordered_json::array();
  for (double x : v.values()) out.push_back(x);
  return out;
}

ordered_json matrix_json(const SquareMatrix& m) {
  ordered_json out = ordered_json::array();
  for (int i = 0; i < m.dim(); ++i) out.push_back(vector_json(m.row(i)));
  return out;
}

std::variant<ThresholdAffine2D, BekkConfig> parse_model(const json& node, const std::string& path) {
  if (!node.is_object() || !node.contains("kind") || !node["kind"].is_string()) {
    fail(path + "/kind", "model needs a string 'kind' ('threshold' or 'bekk')");
  }
  const std::string kind = node["kind"].get<std::string>();
  if (kind == "threshold") {
    ObjectReader r(node, path, {"kind", "a", "b", "d_main", "d_c", "d_const"});
    ThresholdAffine2D t;
    t.a = r.has("a") ? read_vector(r.at("a"), r.child("a"), 2) : StateVector{0.0, 0.0};
    t.b = read_matrix(r.at("b"), r.child("b"), 2);
    t.d_main = read_matrix(r.at("d_main"), r.child("d_main"), 2);
    t.d_c = read_vector(r.at("d_c"), r.child("d_c"), 2);
    t.d_const = read_vector(r.at("d_const"), r.child("d_const"), 2);
    return t;
  }
  if (kind == "bekk") {
    ObjectReader r(node, path, {"kind", "f", "A", "B"});
    ObjectReader f(r.at("f"), r.child("f"), {"constant", "matrix"});
    BekkConfig b;
    b.f.constant = f.has("constant") ? read_vector(f.at("constant"), f.child("constant"), 2) : StateVector{0.0, 0.0};
    b.f.matrix = read_matrix(f.at("matrix"), f.child("matrix"), 2);
    b.a = read_matrix(r.at("A"), r.child("A"), 2);
    b.b = read_matrix(r.at("B"), r.child("B"), 2);
    return b;
  }
  fail(path + "/kind", "unknown model kind '" + kind + "'");
}

NoiseConfig parse_noise(const json& node, const std::string& path) {
  ObjectReader r(node, path, {"kind", "dim"});
  NoiseConfig n;
  n.kind = r.string("kind");
  n.dim = static_cast<int>(r.integer_or("dim", 2));
  if (n.kind == "expol2") {
    if (n.dim != 2) fail(r.child("dim"), "expol2 noise is two-dimensional");
  } else if (n.kind == "gaussian") {
    if (n.dim < 1 || n.dim > kMaxDim) fail(r.child("dim"), "dimension out of range");
  } else {
    fail(r.child("kind"), "unknown noise kind '" + n.kind + "' (expected 'expol2' or 'gaussian')");
  }
  return n;
}

SimulationSection parse_simulation(const json& node, const std::string& path) {
  ObjectReader r(node, path, {"T", "n_traj", "snapshots", "seed", "divergence_threshold", "init", "dump_paths"});
  SimulationSection s;
  s.horizon = static_cast<int>(r.integer_or("T", s.horizon));
  s.n_traj = static_cast<int>(r.integer_or("n_traj", s.n_traj));
  if (s.horizon < 1) fail(r.child("T"), "must be >= 1");
  if (s.n_traj < 1) fail(r.child("n_traj"), "must be >= 1");
  if (r.has("snapshots")) {
    const json& snaps = r.at("snapshots");
    if (!snaps.is_array() || snaps.empty()) fail(r.child("snapshots"), "expected a nonempty array of integers");
    s.snapshots.clear();
    for (std::size_t i = 0; i < snaps.size(); ++i) {
      const std::string p = r.child("snapshots") + "/" + std::to_string(i);
      const auto t = ObjectReader::as_integer(snaps[i], p);
      if (t < 0 || t > s.horizon) fail(p, "snapshot time outside [0, T]");
      if (!s.snapshots.empty() && t <= s.snapshots.back()) fail(p, "snapshot times must be strictly increasing");
      s.snapshots.push_back(static_cast<int>(t));
    }
  } else {
    s.snapshots = {s.horizon};
  }
  s.seed = r.unsigned_or("seed", s.seed);
  s.divergence_threshold = r.number_or("divergence_threshold", s.divergence_threshold);
  if (!(s.divergence_threshold > 0.0)) fail(r.child("divergence_threshold"), "must be > 0");
  if (r.has("init")) s.init = read_vector(r.at("init"), r.child("init"));
  s.dump_paths = static_cast<int>(r.integer_or("dump_paths", 0));
  if (s.dump_paths < 0) fail(r.child("dump_paths"), "must be >= 0");
  return s;
}

ChecksSection parse_checks(const json& node, const std::string& path) {
  ObjectReader r(node, path,
                 {"s", "envelope", "moment_method", "mc_samples", "mc_seed", "shell", "reference_gamma",
                  "skeleton_horizon"});
  ChecksSection c;
  c.s = r.number_or("s", c.s);
  if (!(c.s > 0.0)) fail(r.child("s"), "must be > 0");
  if (r.has("envelope")) {
    const json& env = r.at("envelope");
    if (env.is_string()) {
      const std::string choice = env.get<std::string>();
      if (choice == "analytic") {
        c.envelope = EnvelopeChoice::analytic;
      } else if (choice == "shell") {
        c.envelope = EnvelopeChoice::shell;
      } else {
        fail(r.child("envelope"), "expected 'analytic', 'shell' or an object of constants");
      }
    } else {
      ObjectReader e(env, r.child("envelope"), {"a_f", "b_f", "a_g", "b_g", "M"});
      DriftEnvelope d;
      d.s = SExponent(c.s);
      d.a_f = e.number("a_f");
      d.b_f = e.number("b_f");
      d.a_g = e.number("a_g");
      d.b_g = e.number("b_g");
      d.m = e.number("M");
      d.source = EnvelopeSource::user_supplied;
      try {
        d.validate();
      } catch (const Error& err) {
        fail(r.child("envelope"), err.what());
      }
      c.envelope = EnvelopeChoice::user;
      c.user_envelope = d;
    }
  }
  if (r.has("moment_method")) {
    try {
      c.moment_method = moment_method_from_string(r.string("moment_method"));
    } catch (const Error& err) {
      fail(r.child("moment_method"), err.what());
    }
  }
  c.mc_samples = r.unsigned_or("mc_samples", c.mc_samples);
  if (c.mc_samples < 2) fail(r.child("mc_samples"), "must be >= 2");
  c.mc_seed = r.unsigned_or("mc_seed", c.mc_seed);
  if (r.has("shell")) {
    ObjectReader sh(r.at("shell"), r.child("shell"), {"M", "R", "samples", "seed"});
    c.shell.m = sh.number_or("M", c.shell.m);
    c.shell.r = sh.number_or("R", c.shell.r);
    c.shell.samples = sh.unsigned_or("samples", c.shell.samples);
    c.shell.seed = sh.unsigned_or("seed", c.shell.seed);
    if (!(c.shell.m > 0.0) || !(c.shell.r > c.shell.m)) fail(r.child("shell"), "needs R > M > 0");
    if (c.shell.samples < 1000) fail(sh.child("samples"), "must be >= 1000");
  }
  if (r.has("reference_gamma")) c.reference_gamma = r.number("reference_gamma");
  c.skeleton_horizon = static_cast<int>(r.integer_or("skeleton_horizon", c.skeleton_horizon));
  if (c.skeleton_horizon < 1) fail(r.child("skeleton_horizon"), "must be >= 1");
  return c;
}

ThresholdAffine2D example2_threshold() {
  ThresholdAffine2D t;
  t.a = StateVector{0.0, 0.0};
  t.b = SquareMatrix{{0.2, 0.1}, {0.1, 0.3}};
  t.d_main = SquareMatrix{{0.1, -0.15}, {-0.15, 0.1}};
  t.d_c = StateVector{0.2, -0.25};
  t.d_const = StateVector{1.0, 1.0};
  return t;
}

}  // namespace

ModelSpec ExperimentConfig::build_model() const {
  if (const auto* t = std::get_if<ThresholdAffine2D>(&model)) return ModelSpec::threshold(*t);
  const auto& b = std::get<BekkConfig>(model);
  return ModelSpec::bekk_affine(b.f, b.a, b.b);
}

NoiseSpec ExperimentConfig::build_noise() const {
  return noise.kind == "expol2" ? NoiseSpec::expol2() : NoiseSpec::gaussian(noise.dim);
}

SimulationConfig ExperimentConfig::build_simulation(int threads) const {
  SimulationConfig cfg{
      .model = build_model(),
      .noise = build_noise(),
      .x0 = simulation.init,
      .init_sampler = {},
      .horizon = simulation.horizon,
      .n_traj = simulation.n_traj,
      .snapshot_times = simulation.snapshots,
      .master_seed = simulation.seed,
      .divergence_threshold = simulation.divergence_threshold,
      .threads = threads,
      .keep_paths = simulation.dump_paths,
  };
  cfg.validate();
  return cfg;
}

ReportOptions ExperimentConfig::build_report_options() const {
  ReportOptions o;
  o.s = SExponent(checks.s);
  o.envelope = checks.envelope;
  o.user_envelope = checks.user_envelope;
  o.moment_method = checks.moment_method;
  o.moment_budget.samples = checks.mc_samples;
  o.moment_budget.seed = checks.mc_seed;
  o.shell_m = checks.shell.m;
  o.shell_r = checks.shell.r;
  o.shell_samples = checks.shell.samples;
  o.shell_seed = checks.shell.seed;
  o.skeleton_horizon = checks.skeleton_horizon;
  o.reference_gamma = checks.reference_gamma;
  return o;
}

ExperimentConfig parse_config(const json& doc) {
  // "provenance" is written by the tool into emitted configs and ignored here.
  ObjectReader r(doc, "", {"name", "model", "noise", "simulation", "checks", "provenance"});
  ExperimentConfig c;
  if (r.has("name")) c.name = r.string("name");
  c.model = parse_model(r.at("model"), "/model");
  c.noise = parse_noise(r.at("noise"), "/noise");
  if (r.has("simulation")) c.simulation = parse_simulation(r.at("simulation"), "/simulation");
  if (r.has("checks")) c.checks = parse_checks(r.at("checks"), "/checks");

  if (c.simulation.init.dim() != 2) fail("/simulation/init", "built-in models are two-dimensional");
  if (c.noise.dim != 2) fail("/noise/dim", "built-in models are two-dimensional");
  return c;
}

ExperimentConfig parse_config_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw Error(ErrorKind::config, std::string("malformed JSON: ") + err.what());
  }
  return parse_config(doc);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

ordered_json to_json(const ExperimentConfig& c) {
  ordered_json doc;
  doc["name"] = c.name;
  if (const auto* t = std::get_if<ThresholdAffine2D>(&c.model)) {
    doc["model"] = {{"kind", "threshold"},
                    {"a", vector_json(t->a)},
                    {"b", matrix_json(t->b)},
                    {"d_main", matrix_json(t->d_main)},
                    {"d_c", vector_json(t->d_c)},
                    {"d_const", vector_json(t->d_const)}};
  } else {
    const auto& b = std::get<BekkConfig>(c.model);
    doc["model"] = {{"kind", "bekk"},
                    {"f", {{"constant", vector_json(b.f.constant)}, {"matrix", matrix_json(b.f.matrix)}}},
                    {"A", matrix_json(b.a)},
                    {"B", matrix_json(b.b)}};
  }
  doc["noise"] = {{"kind", c.noise.kind}, {"dim", c.noise.dim}};
  doc["simulation"] = {{"T", c.simulation.horizon},
                       {"n_traj", c.simulation.n_traj},
                       {"snapshots", c.simulation.snapshots},
                       {"seed", c.simulation.seed},
                       {"divergence_threshold", c.simulation.divergence_threshold},
                       {"init", vector_json(c.simulation.init)},
                       {"dump_paths", c.simulation.dump_paths}};
  ordered_json checks;
  checks["s"] = c.checks.s;
  switch (c.checks.envelope) {
    case EnvelopeChoice::analytic: checks["envelope"] = "analytic"; break;
    case EnvelopeChoice::shell: checks["envelope"] = "shell"; break;
    case EnvelopeChoice::user: {
      const DriftEnvelope& e = *c.checks.user_envelope;
      checks["envelope"] = {{"a_f", e.a_f}, {"b_f", e.b_f}, {"a_g", e.a_g}, {"b_g", e.b_g}, {"M", e.m}};
      break;
    }
  }
  checks["moment_method"] = std::string(to_string(c.checks.moment_method));
  checks["mc_samples"] = c.checks.mc_samples;
  checks["mc_seed"] = c.checks.mc_seed;
  checks["shell"] = {{"M", c.checks.shell.m},
                     {"R", c.checks.shell.r},
                     {"samples", c.checks.shell.samples},
                     {"seed", c.checks.shell.seed}};
  if (c.checks.reference_gamma) checks["reference_gamma"] = *c.checks.reference_gamma;
  checks["skeleton_horizon"] = c.checks.skeleton_horizon;
  doc["checks"] = checks;
  return doc;
}

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"example2-ergodic", "example2-unit-root", "example2-variance",
                                              "bekk-demo"};
  return names;
}

ExperimentConfig builtin_config(std::string_view name) {
  ExperimentConfig c;
  c.name = std::string(name);
  c.noise = {"expol2", 2};
  c.simulation.horizon = 10'000;
  c.simulation.n_traj = 200;
  c.simulation.snapshots = {100, 1000, 5000, 10'000};
  c.simulation.init = StateVector{0.0, 0.0};
  c.checks.s = 1.0;
  c.checks.envelope = EnvelopeChoice::analytic;
  c.checks.moment_method = MomentMethod::quadrature;

  if (name == "example2-ergodic") {
    c.model = example2_threshold();
    c.checks.reference_gamma = 0.981;
  } else if (name == "example2-unit-root") {
    ThresholdAffine2D t = example2_threshold();
    t.b = SquareMatrix::identity(2);
    c.model = t;
    c.simulation.n_traj = 500;
  } else if (name == "example2-variance") {
    ThresholdAffine2D t = example2_threshold();
    t.d_main = SquareMatrix{{0.4, 0.4}, {0.4, 0.4}};
    c.model = t;
    c.simulation.n_traj = 500;
  } else if (name == "bekk-demo") {
    BekkConfig b;
    b.f = AffineMap{StateVector{1.0, 0.0}, 0.4 * SquareMatrix::identity(2)};
    b.a = SquareMatrix::identity(2);
    b.b = SquareMatrix{{1.0, 1.0}, {1.0, 1.0}};
    c.model = b;
    c.noise = {"gaussian", 2};
    c.simulation.horizon = 1000;
    c.simulation.snapshots = {100, 1000};
    c.checks.s = 2.0;
    c.checks.moment_method = MomentMethod::analytic;
  } else {
    std::string known;
    for (const auto& n : builtin_names()) known += (known.empty() ? "" : ", ") + n;
    throw Error(ErrorKind::config, "unknown built-in '" + std::string(name) + "'; available: " + known);
  }
  return c;
}

}  // namespace ergokit
