#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edis/trajectory.hpp"
#include "json.hpp"

namespace edis {

/// Line-delimited trace records. Each line is one JSON object:
///
///   {"prompt_id": "p1", "response_id": "r1",
///    "entropies": [0.1, 0.4, ...]            // or
///    "tokens": [{"text": "The", "entropy": 0.1},
///               {"text": " x", "top_probs": [0.9, 0.05]}],
///    "text": "... \\boxed{42}",               // optional, answer source
///    "answer": "42", "correct": true, "reward": 1.0, "vocab_size": 151936}
///
/// Lines whose "record" field is "header" or "summary" (report metadata)
/// and blank lines are ignored.
struct ParseOptions {
  bool lenient = false;  // skip malformed lines instead of failing
  TailMode tail_mode = TailMode::single_bucket;
};

struct ParseIssue {
  std::size_t line = 0;
  std::string message;
};

struct ParseResult {
  std::vector<ResponseRecord> records;
  std::vector<ParseIssue> skipped;
};

/// Throws Error{io} for unreadable files. Malformed lines throw an Error
/// whose message names the line, unless options.lenient.
ParseResult parse_trace(const std::filesystem::path& path, const ParseOptions& options = {});
ParseResult parse_trace(std::istream& in, const ParseOptions& options = {},
                        std::string_view source = "<stream>");

ResponseRecord record_from_json(const nlohmann::json& j, const ParseOptions& options = {});
nlohmann::json record_to_json(const ResponseRecord& record);

void write_trace(std::ostream& out, std::span<const ResponseRecord> records);

/// True for report metadata lines that trace parsing skips.
bool is_metadata_record(const nlohmann::json& j);

struct PromptGroup {
  std::string prompt_id;
  std::vector<ResponseRecord> records;
};

/// Groups by prompt_id in order of first appearance; records keep input order.
std::vector<PromptGroup> group_by_prompt(std::span<const ResponseRecord> records);

}  // namespace edis
