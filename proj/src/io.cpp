#include "ergokit/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ergokit/error.hpp"

namespace ergokit {

namespace {

ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json vector_json(const StateVector& v) {
  ordered_json out = ordered_json::array();
  for (double x : v.values()) out.push_back(number_or_null(x));
  return out;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string text = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Provenance provenance_of(const ExperimentConfig& config) { return {config.simulation.seed, config_hash(config)}; }

ordered_json provenance_json(const Provenance& p) {
  return {{"tool", std::string(kToolName)},
          {"version", std::string(kToolVersion)},
          {"master_seed", p.master_seed},
          {"config_hash", p.config_hash}};
}

std::string provenance_footer(const Provenance& p) {
  return "# " + std::string(kToolName) + " " + std::string(kToolVersion) + " master_seed=" +
         std::to_string(p.master_seed) + " config_hash=" + p.config_hash + "\n";
}

ordered_json to_json(const MomentEstimate& m) {
  return {{"value", m.value},
          {"std_error", m.std_error},
          {"method", std::string(to_string(m.method))},
          {"sample_count", m.sample_count},
          {"s", m.s}};
}

ordered_json to_json(const DriftEnvelope& e) {
  return {{"s", e.s.value()}, {"a_f", e.a_f},   {"b_f", e.b_f},
          {"a_g", e.a_g},     {"b_g", e.b_g},   {"M", e.m},
          {"source", std::string(to_string(e.source))},
          {"g_norm", std::string(to_string(e.g_norm))}};
}

ordered_json to_json(const CheckResult& c) {
  ordered_json witnesses = ordered_json::object();
  for (const auto& [name, value] : c.witnesses) witnesses[name] = number_or_null(value);
  return {{"name", c.name},
          {"passed", c.passed},
          {"advisory", c.advisory},
          {"witnesses", witnesses},
          {"detail", c.detail}};
}

ordered_json to_json(const ErgodicityReport& r) {
  ordered_json structural = ordered_json::array();
  for (const auto& c : r.structural) structural.push_back(to_json(c));
  ordered_json doc;
  doc["structural"] = structural;
  doc["gamma"] = r.gamma;
  doc["gamma_below_one"] = r.gamma < 1.0;
  doc["reference_gamma"] = r.reference_gamma ? ordered_json(*r.reference_gamma) : ordered_json(nullptr);
  doc["noise_moment"] = to_json(r.noise_moment);
  doc["envelope"] = to_json(r.envelope);
  doc["verdict"] = std::string(to_string(r.verdict));
  doc["notes"] = r.notes;
  return doc;
}

ordered_json to_json(const EnsembleSummary& s) {
  ordered_json snaps = ordered_json::array();
  for (const auto& snap : s.snapshots) {
    snaps.push_back({{"t", snap.t},
                     {"contributing", snap.contributing},
                     {"diverged", snap.diverged},
                     {"mean", vector_json(snap.mean)},
                     {"second_moment", vector_json(snap.second_moment)},
                     {"norm_mean", number_or_null(snap.norm_mean)},
                     {"norm_q10", number_or_null(snap.norm_q10)},
                     {"norm_q50", number_or_null(snap.norm_q50)},
                     {"norm_q90", number_or_null(snap.norm_q90)}});
  }
  ordered_json divergence = ordered_json::array();
  for (const auto& d : s.first_divergence) divergence.push_back(d ? ordered_json(*d) : ordered_json(nullptr));
  return {{"n_traj", s.n_traj},
          {"T", s.horizon},
          {"dim", s.dim},
          {"master_seed", s.master_seed},
          {"divergence_threshold", s.divergence_threshold},
          {"diverged_count", s.diverged_count},
          {"first_divergence", divergence},
          {"snapshots", snaps}};
}

std::string snapshots_csv(const EnsembleSummary& s, const Provenance& p) {
  std::ostringstream os;
  os << "t,contributing,diverged";
  for (int i = 1; i <= s.dim; ++i) os << ",mean_x" << i;
  for (int i = 1; i <= s.dim; ++i) os << ",m2_x" << i;
  os << ",norm_mean,norm_q10,norm_q50,norm_q90\n";
  for (const auto& snap : s.snapshots) {
    os << snap.t << ',' << snap.contributing << ',' << snap.diverged;
    for (int i = 0; i < s.dim; ++i) os << ',' << format_number(snap.mean[i]);
    for (int i = 0; i < s.dim; ++i) os << ',' << format_number(snap.second_moment[i]);
    os << ',' << format_number(snap.norm_mean) << ',' << format_number(snap.norm_q10) << ','
       << format_number(snap.norm_q50) << ',' << format_number(snap.norm_q90) << '\n';
  }
  os << provenance_footer(p);
  return os.str();
}

std::string paths_csv(const EnsembleSummary& s, const Provenance& p) {
  std::ostringstream os;
  os << "traj_id,t";
  for (int i = 1; i <= s.dim; ++i) os << ",x_" << i;
  os << '\n';
  for (std::size_t id = 0; id < s.paths.size(); ++id) {
    const auto& path = s.paths[id];
    for (std::size_t t = 0; t < path.size(); ++t) {
      os << id << ',' << t;
      for (double v : path[t].values()) os << ',' << format_number(v);
      os << '\n';
    }
  }
  os << provenance_footer(p);
  return os.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::config, "cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::config, "failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::config, "cannot move output into place at '" + path.string() + "'");
  }
}

std::string dump_with_provenance(ordered_json doc, const Provenance& p) {
  doc["provenance"] = provenance_json(p);
  return doc.dump(2) + "\n";
}

}  // namespace ergokit
