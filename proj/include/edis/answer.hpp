#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace edis {

// Extra normalization applied after the built-in syntactic rules, e.g. to
// map "1/2" and "0.5" to one canonical form.
using AnswerNormalizer = std::function<std::string(std::string)>;

/// Trims, collapses internal whitespace, strips trailing periods and writes
/// integer-valued decimals as integers ("42.0" -> "42"). Idempotent.
std::string normalize_answer(std::string_view answer);

/// Content of the last balanced `\boxed{...}` in `raw_text`, normalized.
/// Returns nullopt when there is none or it normalizes to empty.
std::optional<std::string> extract_answer(std::string_view raw_text,
                                          const AnswerNormalizer& extra = {});

}  // namespace edis
