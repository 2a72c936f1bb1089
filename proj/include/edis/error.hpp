#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace edis {

enum class ErrorCode {
  invalid_distribution,
  invalid_trajectory,
  empty_trajectory,
  invalid_config,
  insufficient_data,
  size,
  missing_score,
  missing_answer,
  insufficient_labels,
  degenerate_labels,
  undefined_correlation,
  undefined_effect,
  undefined_ratio,
  domain,
  shape,
  parse,
  io,
  missing_text,
  invalid_profile,
  usage,
};

// Stable machine-readable name, used in CLI error records.
std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace edis
