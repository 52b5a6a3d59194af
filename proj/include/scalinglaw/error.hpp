#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scalinglaw {

enum class ErrorCode {
  invalid_argument,
  invalid_curve,
  infeasible_target,
  insufficient_data,
  non_positive_loss,
  missing_model_params,
  no_power_law_region,
  invalid_fractions,
  too_small_dataset,
  invalid_plan,
  size_mismatch,
  method_mismatch,
  learner_failure,
  empty_shard,
  parse_error,
  io_error,
};

/// Stable identifier used in machine-readable error output, e.g. "InfeasibleTarget".
std::string_view error_code_name(ErrorCode code) noexcept;

/// Every failure raised by the library. `context()` carries optional
/// location info (a shard, a capacity, a CSV line) separate from the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string context = {})
      : std::runtime_error(message), code_(code), context_(std::move(context)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& context() const noexcept { return context_; }

 private:
  ErrorCode code_;
  std::string context_;
};

}  // namespace scalinglaw
