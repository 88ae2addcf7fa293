#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "ergokit/config.hpp"
#include "ergokit/ergodicity.hpp"
#include "ergokit/simulate.hpp"

namespace ergokit {

inline constexpr std::string_view kToolName = "ergokit";
inline constexpr std::string_view kToolVersion = "0.1.0";

/// FNV-1a 64-bit hash of the canonical config document, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

struct Provenance {
  std::uint64_t master_seed = 0;
  std::string config_hash;
};

Provenance provenance_of(const ExperimentConfig& config);
ordered_json provenance_json(const Provenance& p);
/// "# ergokit 0.1.0 master_seed=<seed> config_hash=<hash>"
std::string provenance_footer(const Provenance& p);

ordered_json to_json(const MomentEstimate& m);
ordered_json to_json(const DriftEnvelope& e);
ordered_json to_json(const CheckResult& c);
ordered_json to_json(const ErgodicityReport& r);
/// Snapshot samples and full paths are left out; they go to CSV.
ordered_json to_json(const EnsembleSummary& s);

/// One row per snapshot time: t, contributing, diverged, mean_x*, m2_x*,
/// norm_mean, norm_q10, norm_q50, norm_q90.
std::string snapshots_csv(const EnsembleSummary& s, const Provenance& p);
/// traj_id, t, x_1 .. x_n for every kept path.
std::string paths_csv(const EnsembleSummary& s, const Provenance& p);

/// Doubles printed with 17 significant digits.
std::string format_number(double v);

/// Writes to a sibling temporary and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// JSON text with the provenance object appended as the last member.
std::string dump_with_provenance(ordered_json doc, const Provenance& p);

}  // namespace ergokit
