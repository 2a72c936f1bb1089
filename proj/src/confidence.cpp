#include "edis/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "edis/error.hpp"
#include "edis/log.hpp"

namespace edis {

std::string_view to_string(ScoreKind kind) noexcept {
  switch (kind) {
    case ScoreKind::edis: return "edis";
    case ScoreKind::mean_entropy: return "mean_entropy";
    case ScoreKind::self_certainty: return "self_certainty";
  }
  return "edis";
}

std::string_view to_string(Direction direction) noexcept {
  return direction == Direction::lower_is_confident ? "lower_is_confident"
                                                    : "higher_is_confident";
}

std::optional<ScoreKind> parse_score_kind(std::string_view name) noexcept {
  if (name == "edis") return ScoreKind::edis;
  if (name == "entropy" || name == "mean_entropy") return ScoreKind::mean_entropy;
  if (name == "sc" || name == "self_certainty") return ScoreKind::self_certainty;
  return std::nullopt;
}

ConfidenceScore edis_score(const EntropyTrajectory& traj, const SpikeConfig& cfg) {
  return {ScoreKind::edis, edis(traj, cfg), direction_of(ScoreKind::edis)};
}

ConfidenceScore sequence_entropy(const EntropyTrajectory& traj) {
  return {ScoreKind::mean_entropy, mean_entropy(traj), direction_of(ScoreKind::mean_entropy)};
}

namespace {

constexpr double kFullSupportTolerance = 1e-6;

bool covers_full_support(const TokenStep& step) {
  if (!step.top_probs || step.top_probs->empty()) return false;
  const double sum = std::accumulate(step.top_probs->begin(), step.top_probs->end(), 0.0);
  return std::abs(sum - 1.0) <= kFullSupportTolerance;
}

std::optional<double> compute_self_certainty(const ResponseRecord& resp) {
  const auto& traj = resp.trajectory;
  const auto h = traj.entropies();

  if (resp.vocab_size) {
    const double log_v = std::log(static_cast<double>(*resp.vocab_size));
    const bool in_range = std::all_of(h.begin(), h.end(), [&](double x) { return x <= log_v; });
    // ln|V| - mean(H) keeps the identity with sequence entropy exact.
    if (in_range) return log_v - mean_entropy(traj);
    log::warn("response " + resp.response_id +
              ": token entropy exceeds ln(vocab_size); clamping self-certainty at 0");
    double acc = 0.0;
    for (double x : h) acc += std::max(0.0, log_v - x);
    return acc / static_cast<double>(h.size());
  }

  const auto steps = traj.steps();
  if (!std::all_of(steps.begin(), steps.end(), covers_full_support)) return std::nullopt;
  double acc = 0.0;
  bool clamped = false;
  for (const auto& step : steps) {
    const double sc = std::log(static_cast<double>(step.top_probs->size())) - step.entropy;
    if (sc < 0.0) clamped = true;
    acc += std::max(0.0, sc);
  }
  if (clamped) {
    log::warn("response " + resp.response_id +
              ": token entropy exceeds ln(support size); clamping self-certainty at 0");
  }
  return acc / static_cast<double>(steps.size());
}

}  // namespace

std::optional<ConfidenceScore> try_self_certainty(const ResponseRecord& resp) {
  auto value = compute_self_certainty(resp);
  if (!value) return std::nullopt;
  return ConfidenceScore{ScoreKind::self_certainty, *value,
                         direction_of(ScoreKind::self_certainty)};
}

ConfidenceScore self_certainty(const ResponseRecord& resp) {
  auto score = try_self_certainty(resp);
  if (!score) {
    throw Error(ErrorCode::insufficient_data,
                "self-certainty for response " + resp.response_id +
                    " needs vocab_size or full-support top_probs on every token");
  }
  return *score;
}

}  // namespace edis
