#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ergokit {

enum class ErrorKind {
  invalid_parameter,
  unsupported_parameter,
  not_psd,
  sampler_misconfiguration,
  unsupported_method,
  model_evaluation,
  unsupported_model,
  envelope_degenerate,
  parameter_mismatch,
  empty_sample,
  insufficient_snapshots,
  config,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` lets callers branch on
/// the failure class without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ergokit
