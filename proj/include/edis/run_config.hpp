#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "edis/confidence.hpp"
#include "edis/curation.hpp"
#include "edis/selection.hpp"
#include "edis/spikes.hpp"
#include "edis/trajectory.hpp"
#include "json.hpp"

namespace edis {

enum class ZScope { group, batch };

/// Fully resolved settings for one CLI run. Defaults are overridden by a
/// JSON config file, which is overridden by flags. Every report header
/// embeds the resolved value.
struct RunConfig {
  SpikeConfig spike;

  // selection / voting
  std::size_t k = 8;
  std::vector<std::size_t> m;  // empty: use the whole pool
  ScoreKind metric = ScoreKind::edis;
  double epsilon = kDefaultBordaEpsilon;

  // curation
  double alpha = kDefaultAlpha;
  std::optional<std::size_t> target_n;
  std::optional<double> oversample;  // target_n = round(members / oversample)
  ZScope z_scope = ZScope::group;

  // evaluation
  std::vector<double> retention = {0.1, 0.2, 0.3, 0.5};

  // ingestion
  TailMode tail_mode = TailMode::single_bucket;
  bool lenient = false;

  std::uint64_t seed = 0;

  std::string in;
  std::string out = "-";
  std::string checkpoint_series;

  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);

/// Applies the keys present in `j` on top of `cfg`. Unknown keys throw
/// Error{invalid_config}.
void merge_json(RunConfig& cfg, const nlohmann::json& j);

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = {});

}  // namespace edis
