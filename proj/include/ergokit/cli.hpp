#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ergokit/config.hpp"
#include "ergokit/ergodicity.hpp"
#include "ergokit/simulate.hpp"

namespace ergokit::cli {

enum ExitCode : int {
  kSufficientConditionMet = 0,
  kError = 1,
  kConditionFailed = 2,
  kInconclusive = 3,
};

int exit_code_for(Verdict verdict);

/// Replaces simulation.seed with $ERGOKIT_SEED when set; throws
/// Error(config) if the variable is not an unsigned integer.
void apply_seed_override(ExperimentConfig& config);

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

int cmd_check(const std::string& config_path, const std::optional<std::string>& out_path, Streams io);
int cmd_simulate(const std::string& config_path, const std::string& out_dir, int threads, Streams io);

struct MomentsArgs {
  std::string noise = "expol2";
  int dim = 2;
  double s = 1.0;
  std::string method = "quadrature";
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 7;
};
int cmd_moments(const MomentsArgs& args, Streams io);

int cmd_reproduce(const std::string& name, const std::string& out_dir, int threads, Streams io);

/// One expected-versus-observed line of a reproduction comparison.
struct Claim {
  std::string description;
  std::string expected;
  std::string observed;
  bool holds = false;
};

/// The outcomes each built-in reproduction is expected to show, checked
/// against a report and simulation summary.
std::vector<Claim> reproduction_claims(const ExperimentConfig& config, const ErgodicityReport& report,
                                       const EnsembleSummary& summary);

/// Full argument parsing and dispatch; argv[0] is the program name.
int run(int argc, const char* const* argv, Streams io);

}  // namespace ergokit::cli
