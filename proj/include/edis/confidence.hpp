#pragma once

#include <optional>
#include <string_view>

#include "edis/spikes.hpp"
#include "edis/trajectory.hpp"

namespace edis {

enum class ScoreKind { edis, mean_entropy, self_certainty };
enum class Direction { lower_is_confident, higher_is_confident };

std::string_view to_string(ScoreKind kind) noexcept;
std::string_view to_string(Direction direction) noexcept;

// Accepts "edis", "entropy"/"mean_entropy", "sc"/"self_certainty".
std::optional<ScoreKind> parse_score_kind(std::string_view name) noexcept;

constexpr Direction direction_of(ScoreKind kind) noexcept {
  return kind == ScoreKind::self_certainty ? Direction::higher_is_confident
                                           : Direction::lower_is_confident;
}

struct ConfidenceScore {
  ScoreKind kind = ScoreKind::edis;
  double value = 0.0;
  Direction direction = Direction::lower_is_confident;

  bool operator==(const ConfidenceScore&) const = default;
};

// True when `a` expresses strictly more confidence than `b`.
constexpr bool more_confident(double a, double b, Direction direction) noexcept {
  return direction == Direction::lower_is_confident ? a < b : a > b;
}

ConfidenceScore edis_score(const EntropyTrajectory& traj, const SpikeConfig& cfg);

/// Mean token entropy, lower is more confident.
ConfidenceScore sequence_entropy(const EntropyTrajectory& traj);

/// Mean per-token KL(p_t || Uniform(|V|)) = ln|V| - H_t. Higher is more
/// confident.
///
/// |V| comes from `resp.vocab_size` when present. Otherwise every token
/// must carry top_probs that cover the full support (sum within 1e-6 of 1),
/// and |V| is taken per token as the length of that vector. Per-token values
/// below zero (H_t > ln|V|) are clamped to 0 with a warning.
///
/// Throws Error{insufficient_data} when neither source is available.
ConfidenceScore self_certainty(const ResponseRecord& resp);

// Same as self_certainty but returns nullopt instead of throwing
// insufficient_data.
std::optional<ConfidenceScore> try_self_certainty(const ResponseRecord& resp);

}  // namespace edis
