#include "edis/trace_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <utility>

#include "edis/answer.hpp"
#include "edis/error.hpp"
#include "edis/log.hpp"

namespace edis {

using nlohmann::json;

namespace {

constexpr double kEntropyConsistencyTolerance = 1e-3;

[[noreturn]] void parse_fail(const std::string& message) {
  throw Error(ErrorCode::parse, message);
}

const json& require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) parse_fail(std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_string()) parse_fail(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

double as_number(const json& v, const char* what) {
  if (!v.is_number()) parse_fail(std::string(what) + " must be a number");
  return v.get<double>();
}

std::vector<double> number_array(const json& v, const char* what) {
  if (!v.is_array()) parse_fail(std::string(what) + " must be an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(as_number(x, what));
  return out;
}

const json* optional_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return nullptr;
  return &*it;
}

double entropy_of_probs(const std::vector<double>& probs, TailMode mode) {
  const double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (std::abs(sum - 1.0) <= 1e-6) return entropy_from_distribution(probs);
  return entropy_from_truncated(probs, mode);
}

TokenStep token_from_json(const json& t, std::size_t position, const ParseOptions& options) {
  if (!t.is_object()) parse_fail("tokens entries must be objects");
  TokenStep step;
  step.position = position;
  if (const json* text = optional_field(t, "text")) {
    if (!text->is_string()) parse_fail("token text must be a string");
    step.token_text = text->get<std::string>();
  }
  if (const json* probs = optional_field(t, "top_probs")) {
    step.top_probs = number_array(*probs, "top_probs");
  }
  const json* entropy = optional_field(t, "entropy");
  if (!entropy && !step.top_probs) {
    parse_fail("token " + std::to_string(position) + " needs 'entropy' or 'top_probs'");
  }
  if (step.top_probs) {
    const double derived = entropy_of_probs(*step.top_probs, options.tail_mode);
    if (entropy) {
      step.entropy = as_number(*entropy, "entropy");
      if (std::abs(step.entropy - derived) > kEntropyConsistencyTolerance) {
        log::warn("token " + std::to_string(position) + ": entropy " +
                  std::to_string(step.entropy) + " disagrees with top_probs (" +
                  std::to_string(derived) + "); using the given entropy");
      }
    } else {
      step.entropy = derived;
    }
  } else {
    step.entropy = as_number(*entropy, "entropy");
  }
  return step;
}

}  // namespace

bool is_metadata_record(const json& j) {
  auto it = j.find("record");
  return it != j.end() && it->is_string() &&
         (*it == "header" || *it == "summary");
}

ResponseRecord record_from_json(const json& j, const ParseOptions& options) {
  if (!j.is_object()) parse_fail("record must be a JSON object");

  const json* entropies = optional_field(j, "entropies");
  const json* tokens = optional_field(j, "tokens");
  if (entropies && tokens) parse_fail("record has both 'entropies' and 'tokens'");
  if (!entropies && !tokens) parse_fail("record needs 'entropies' or 'tokens'");

  std::vector<TokenStep> steps;
  if (entropies) {
    const auto values = number_array(*entropies, "entropies");
    for (std::size_t i = 0; i < values.size(); ++i) {
      steps.push_back(TokenStep{.position = i + 1, .entropy = values[i]});
    }
  } else {
    if (!tokens->is_array()) parse_fail("'tokens' must be an array");
    for (std::size_t i = 0; i < tokens->size(); ++i) {
      steps.push_back(token_from_json((*tokens)[i], i + 1, options));
    }
  }

  ResponseRecord rec{
      .prompt_id = require_string(j, "prompt_id"),
      .response_id = require_string(j, "response_id"),
      .trajectory = EntropyTrajectory(std::move(steps)),
  };

  if (const json* answer = optional_field(j, "answer")) {
    if (!answer->is_string()) parse_fail("'answer' must be a string");
    auto normalized = normalize_answer(answer->get<std::string>());
    if (!normalized.empty()) rec.answer = std::move(normalized);
  } else if (const json* text = optional_field(j, "text")) {
    if (!text->is_string()) parse_fail("'text' must be a string");
    rec.answer = extract_answer(text->get<std::string>());
  }
  if (const json* correct = optional_field(j, "correct")) {
    if (!correct->is_boolean()) parse_fail("'correct' must be a boolean");
    rec.correct = correct->get<bool>();
  }
  if (const json* reward = optional_field(j, "reward")) {
    rec.reward = as_number(*reward, "reward");
    if (!std::isfinite(*rec.reward)) parse_fail("'reward' must be finite");
  }
  if (const json* vocab = optional_field(j, "vocab_size")) {
    if (!vocab->is_number_integer() || vocab->get<std::int64_t>() <= 0) {
      parse_fail("'vocab_size' must be a positive integer");
    }
    rec.vocab_size = vocab->get<std::uint64_t>();
  }
  rec.validate();
  return rec;
}

json record_to_json(const ResponseRecord& record) {
  json j;
  j["prompt_id"] = record.prompt_id;
  j["response_id"] = record.response_id;

  const auto steps = record.trajectory.steps();
  const bool rich = std::any_of(steps.begin(), steps.end(), [](const TokenStep& s) {
    return s.token_text.has_value() || s.top_probs.has_value();
  });
  if (rich) {
    json tokens = json::array();
    for (const auto& s : steps) {
      json t;
      if (s.token_text) t["text"] = *s.token_text;
      t["entropy"] = s.entropy;
      if (s.top_probs) t["top_probs"] = *s.top_probs;
      tokens.push_back(std::move(t));
    }
    j["tokens"] = std::move(tokens);
  } else {
    j["entropies"] = std::vector<double>(record.trajectory.entropies().begin(),
                                         record.trajectory.entropies().end());
  }
  if (record.answer) j["answer"] = *record.answer;
  if (record.correct) j["correct"] = *record.correct;
  if (record.reward) j["reward"] = *record.reward;
  if (record.vocab_size) j["vocab_size"] = *record.vocab_size;
  return j;
}

void write_trace(std::ostream& out, std::span<const ResponseRecord> records) {
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

ParseResult parse_trace(std::istream& in, const ParseOptions& options, std::string_view source) {
  ParseResult result;
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        parse_fail(std::string("malformed JSON: ") + e.what());
      }
      if (is_metadata_record(j)) continue;
      auto rec = record_from_json(j, options);
      if (!seen.emplace(rec.prompt_id, rec.response_id).second) {
        parse_fail("duplicate (prompt_id, response_id) = (" + rec.prompt_id + ", " +
                   rec.response_id + ")");
      }
      result.records.push_back(std::move(rec));
    } catch (const Error& e) {
      const std::string where = std::string(source) + ":" + std::to_string(line_no) + ": ";
      if (!options.lenient) throw Error(e.code(), where + e.what());
      log::warn("skipping " + where + e.what());
      result.skipped.push_back({line_no, e.what()});
    } catch (const json::exception& e) {
      const std::string where = std::string(source) + ":" + std::to_string(line_no) + ": ";
      if (!options.lenient) throw Error(ErrorCode::parse, where + e.what());
      log::warn("skipping " + where + e.what());
      result.skipped.push_back({line_no, e.what()});
    }
  }
  return result;
}

ParseResult parse_trace(const std::filesystem::path& path, const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot read trace file " + path.string());
  return parse_trace(in, options, path.string());
}

std::vector<PromptGroup> group_by_prompt(std::span<const ResponseRecord> records) {
  std::vector<PromptGroup> groups;
  std::map<std::string, std::size_t> index;
  for (const auto& r : records) {
    auto [it, inserted] = index.emplace(r.prompt_id, groups.size());
    if (inserted) groups.push_back({r.prompt_id, {}});
    groups[it->second].records.push_back(r);
  }
  return groups;
}

}  // namespace edis
