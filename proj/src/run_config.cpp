#include "edis/run_config.hpp"

#include <cmath>
#include <fstream>

#include "edis/error.hpp"

namespace edis {

using nlohmann::json;

void RunConfig::validate() const {
  spike.validate();
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::invalid_config, msg); };
  if (k < 1) fail("k must be >= 1");
  for (auto mult : m) {
    if (mult < 1) fail("m must be >= 1");
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) fail("epsilon must be > 0");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) fail("alpha must be > 0");
  if (target_n && *target_n < 1) fail("target_n must be >= 1");
  if (oversample && !(*oversample >= 1.0 && std::isfinite(*oversample))) {
    fail("oversample multiplier must be >= 1");
  }
  for (double q : retention) {
    if (!(q > 0.0 && q <= 1.0)) fail("retention fractions must lie in (0, 1]");
  }
}

json to_json(const RunConfig& c) {
  json j;
  j["window"] = c.spike.window;
  j["tau_burst"] = c.spike.tau_burst;
  j["tau_rebound"] = c.spike.tau_rebound;
  j["tau_diff"] = c.spike.tau_diff;
  j["k"] = c.k;
  j["m"] = c.m;
  j["metric"] = std::string(to_string(c.metric));
  j["epsilon"] = c.epsilon;
  j["alpha"] = c.alpha;
  j["target_n"] = c.target_n ? json(*c.target_n) : json(nullptr);
  j["oversample"] = c.oversample ? json(*c.oversample) : json(nullptr);
  j["z_scope"] = c.z_scope == ZScope::group ? "group" : "batch";
  j["retention"] = c.retention;
  j["tail_mode"] = c.tail_mode == TailMode::single_bucket ? "single_bucket" : "renormalize";
  j["lenient"] = c.lenient;
  j["seed"] = c.seed;
  j["in"] = c.in;
  j["out"] = c.out;
  j["checkpoint_series"] = c.checkpoint_series;
  return j;
}

void merge_json(RunConfig& c, const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::invalid_config, "config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "window") c.spike.window = v.get<std::size_t>();
      else if (key == "tau_burst") c.spike.tau_burst = v.get<double>();
      else if (key == "tau_rebound") c.spike.tau_rebound = v.get<double>();
      else if (key == "tau_diff") c.spike.tau_diff = v.get<double>();
      else if (key == "k") c.k = v.get<std::size_t>();
      else if (key == "m") c.m = v.get<std::vector<std::size_t>>();
      else if (key == "metric") {
        auto kind = parse_score_kind(v.get<std::string>());
        if (!kind) throw Error(ErrorCode::invalid_config, "unknown metric " + v.dump());
        c.metric = *kind;
      } else if (key == "epsilon") c.epsilon = v.get<double>();
      else if (key == "alpha") c.alpha = v.get<double>();
      else if (key == "target_n") {
        c.target_n = v.is_null() ? std::nullopt : std::optional(v.get<std::size_t>());
      } else if (key == "oversample") {
        c.oversample = v.is_null() ? std::nullopt : std::optional(v.get<double>());
      } else if (key == "z_scope") {
        const auto s = v.get<std::string>();
        if (s != "group" && s != "batch") {
          throw Error(ErrorCode::invalid_config, "z_scope must be group or batch");
        }
        c.z_scope = s == "group" ? ZScope::group : ZScope::batch;
      } else if (key == "retention") c.retention = v.get<std::vector<double>>();
      else if (key == "tail_mode") {
        const auto s = v.get<std::string>();
        if (s != "single_bucket" && s != "renormalize") {
          throw Error(ErrorCode::invalid_config, "tail_mode must be single_bucket or renormalize");
        }
        c.tail_mode = s == "single_bucket" ? TailMode::single_bucket : TailMode::renormalize;
      } else if (key == "lenient") c.lenient = v.get<bool>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "in") c.in = v.get<std::string>();
      else if (key == "out") c.out = v.get<std::string>();
      else if (key == "checkpoint_series") c.checkpoint_series = v.get<std::string>();
      else throw Error(ErrorCode::invalid_config, "unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_config, std::string("config: ") + e.what());
  }
}

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot read config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::invalid_config, "config " + path.string() + ": " + e.what());
  }
  merge_json(base, j);
  return base;
}

}  // namespace edis
