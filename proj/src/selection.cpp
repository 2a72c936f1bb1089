#include "edis/selection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "edis/error.hpp"
#include "edis/log.hpp"

namespace edis {

const ConfidenceScore& ScoredResponse::score(ScoreKind kind) const {
  auto it = scores.find(kind);
  if (it == scores.end()) {
    throw Error(ErrorCode::missing_score, "response " + response.response_id + " has no " +
                                              std::string(to_string(kind)) + " score");
  }
  return it->second;
}

ScoredResponse score_response(const ResponseRecord& record, const SpikeConfig& cfg) {
  ScoredResponse scored{record, {}};
  scored.scores.emplace(ScoreKind::edis, edis_score(record.trajectory, cfg));
  scored.scores.emplace(ScoreKind::mean_entropy, sequence_entropy(record.trajectory));
  if (auto sc = try_self_certainty(record)) scored.scores.emplace(ScoreKind::self_certainty, *sc);
  return scored;
}

void CandidatePool::validate() const {
  if (candidates.empty()) throw Error(ErrorCode::size, "candidate pool is empty");
  for (const auto& c : candidates) {
    if (c.response.prompt_id != prompt_id) {
      throw Error(ErrorCode::shape, "candidate " + c.response.response_id +
                                        " belongs to prompt " + c.response.prompt_id +
                                        ", not " + prompt_id);
    }
  }
}

CandidatePool best_k_filter(const CandidatePool& pool, std::size_t k, ScoreKind metric) {
  pool.validate();
  if (k == 0 || k > pool.size()) {
    throw Error(ErrorCode::size, "k=" + std::to_string(k) + " must be in [1, " +
                                     std::to_string(pool.size()) + "]");
  }
  std::vector<std::pair<double, std::size_t>> keyed;
  keyed.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    keyed.emplace_back(pool.candidates[i].score(metric).value, i);
  }
  const Direction dir = direction_of(metric);
  std::stable_sort(keyed.begin(), keyed.end(), [dir](const auto& a, const auto& b) {
    return more_confident(a.first, b.first, dir);
  });

  CandidatePool kept{pool.prompt_id, {}};
  kept.candidates.reserve(k);
  for (std::size_t i = 0; i < k; ++i) kept.candidates.push_back(pool.candidates[keyed[i].second]);
  return kept;
}

CandidatePool drop_unanswered(const CandidatePool& pool) {
  CandidatePool out{pool.prompt_id, {}};
  std::copy_if(pool.candidates.begin(), pool.candidates.end(), std::back_inserter(out.candidates),
               [](const ScoredResponse& c) { return c.response.answer.has_value(); });
  return out;
}

namespace {

template <typename WeightFn>
std::vector<AnswerTally> tally(const CandidatePool& pool, WeightFn weight) {
  pool.validate();
  std::vector<AnswerTally> tallies;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& c = pool.candidates[i];
    if (!c.response.answer) {
      throw Error(ErrorCode::missing_answer,
                  "candidate " + c.response.response_id + " has no answer");
    }
    const std::string& answer = *c.response.answer;
    auto it = std::find_if(tallies.begin(), tallies.end(),
                           [&](const AnswerTally& t) { return t.answer == answer; });
    if (it == tallies.end()) {
      tallies.push_back(AnswerTally{answer, 0.0, 0, i});
      it = std::prev(tallies.end());
    }
    it->total += weight(c);
    ++it->votes;
  }
  return tallies;
}

// Tallies are in first-supporter order, so a strict comparison keeps the
// earliest answer on ties.
const AnswerTally& leader(const std::vector<AnswerTally>& tallies, bool by_votes) {
  const AnswerTally* best = &tallies.front();
  for (const auto& t : tallies) {
    const bool better = by_votes ? t.votes > best->votes : t.total > best->total;
    if (better) best = &t;
  }
  return *best;
}

}  // namespace

std::string majority_vote(const CandidatePool& pool) {
  const auto tallies = tally(pool, [](const ScoredResponse&) { return 1.0; });
  return leader(tallies, /*by_votes=*/true).answer;
}

double vote_weight(const ConfidenceScore& score, double epsilon) {
  if (score.direction == Direction::lower_is_confident) return 1.0 / (score.value + epsilon);
  if (score.value < 0.0) {
    log::warn("negative higher-is-confident score clamped to 0 for voting");
    return 0.0;
  }
  return score.value;
}

std::vector<AnswerTally> weighted_tally(const CandidatePool& pool, ScoreKind metric,
                                        double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::invalid_config, "epsilon must be > 0");
  }
  return tally(pool, [&](const ScoredResponse& c) { return vote_weight(c.score(metric), epsilon); });
}

std::string weighted_borda_vote(const CandidatePool& pool, ScoreKind metric, double epsilon) {
  const auto tallies = weighted_tally(pool, metric, epsilon);
  return leader(tallies, /*by_votes=*/false).answer;
}

std::optional<bool> answer_correctness(const CandidatePool& pool, const std::string& answer) {
  for (const auto& c : pool.candidates) {
    if (c.response.answer == answer) return c.response.correct;
  }
  return std::nullopt;
}

SelectionReport pool_metrics(const CandidatePool& pool, ScoreKind metric) {
  pool.validate();
  SelectionReport report;
  std::size_t n_correct = 0;
  for (const auto& c : pool.candidates) {
    if (!c.response.correct) {
      throw Error(ErrorCode::insufficient_labels,
                  "candidate " + c.response.response_id + " has no correctness label");
    }
    if (*c.response.correct) ++n_correct;
    report.kept_ids.push_back(c.response.response_id);
  }
  report.avg_accuracy = static_cast<double>(n_correct) / static_cast<double>(pool.size());

  const auto best = best_k_filter(pool, 1, metric);
  report.best_scored_accuracy = *best.candidates.front().response.correct ? 1 : 0;

  // Labelled candidates always carry answers.
  report.winning_answer = majority_vote(pool);
  report.majority_accuracy = answer_correctness(pool, *report.winning_answer).value_or(false) ? 1 : 0;
  return report;
}

}  // namespace edis
