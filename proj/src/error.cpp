#include "edis/error.hpp"

namespace edis {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_distribution: return "invalid_distribution";
    case ErrorCode::invalid_trajectory: return "invalid_trajectory";
    case ErrorCode::empty_trajectory: return "empty_trajectory";
    case ErrorCode::invalid_config: return "invalid_config";
    case ErrorCode::insufficient_data: return "insufficient_data";
    case ErrorCode::size: return "size";
    case ErrorCode::missing_score: return "missing_score";
    case ErrorCode::missing_answer: return "missing_answer";
    case ErrorCode::insufficient_labels: return "insufficient_labels";
    case ErrorCode::degenerate_labels: return "degenerate_labels";
    case ErrorCode::undefined_correlation: return "undefined_correlation";
    case ErrorCode::undefined_effect: return "undefined_effect";
    case ErrorCode::undefined_ratio: return "undefined_ratio";
    case ErrorCode::domain: return "domain";
    case ErrorCode::shape: return "shape";
    case ErrorCode::parse: return "parse";
    case ErrorCode::io: return "io";
    case ErrorCode::missing_text: return "missing_text";
    case ErrorCode::invalid_profile: return "invalid_profile";
    case ErrorCode::usage: return "usage";
  }
  return "unknown";
}

}  // namespace edis
