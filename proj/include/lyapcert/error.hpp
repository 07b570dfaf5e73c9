#pragma once

#include <stdexcept>
#include <string>

namespace lyapcert {

enum class ErrorCode {
  numeric,
  energy_out_of_band,
  budget_exceeded,
  frequency_out_of_range,
  not_hyperbolic,
  degenerate,
  hypothesis_violated,
  smallness_violated,  // perturbation sizes too large for the log-norm bound
  not_positive,
  config_invalid,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::numeric: return "numeric";
    case ErrorCode::energy_out_of_band: return "energy-out-of-band";
    case ErrorCode::budget_exceeded: return "budget-exceeded";
    case ErrorCode::frequency_out_of_range: return "frequency-out-of-range";
    case ErrorCode::not_hyperbolic: return "not-hyperbolic";
    case ErrorCode::degenerate: return "degenerate";
    case ErrorCode::hypothesis_violated: return "hypothesis-violated";
    case ErrorCode::smallness_violated: return "smallness-violated";
    case ErrorCode::not_positive: return "not-positive";
    case ErrorCode::config_invalid: return "config-invalid";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lyapcert
