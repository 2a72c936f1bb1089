#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edis/confidence.hpp"
#include "edis/spikes.hpp"
#include "edis/trajectory.hpp"

namespace edis {

inline constexpr double kDefaultBordaEpsilon = 0.1;

struct ScoredResponse {
  ResponseRecord response;
  std::map<ScoreKind, ConfidenceScore> scores;

  // Throws Error{missing_score}.
  const ConfidenceScore& score(ScoreKind kind) const;
  bool has_score(ScoreKind kind) const { return scores.contains(kind); }
};

// EDIS and mean entropy always; self-certainty when the record supports it.
ScoredResponse score_response(const ResponseRecord& record, const SpikeConfig& cfg);

struct CandidatePool {
  std::string prompt_id;
  std::vector<ScoredResponse> candidates;

  // Nonempty and every candidate shares prompt_id.
  void validate() const;
  std::size_t size() const noexcept { return candidates.size(); }
};

struct SelectionReport {
  std::vector<std::string> kept_ids;
  std::optional<double> avg_accuracy;
  std::optional<int> best_scored_accuracy;
  std::optional<int> majority_accuracy;
  std::optional<std::string> winning_answer;
};

/// Keeps the k most confident candidates by `metric`, ordered from most to
/// least confident. Ties keep input order.
CandidatePool best_k_filter(const CandidatePool& pool, std::size_t k, ScoreKind metric);

/// Candidates without an answer removed; input order preserved.
CandidatePool drop_unanswered(const CandidatePool& pool);

/// Most frequent answer. Ties go to the answer whose first supporter comes
/// earliest. Throws Error{missing_answer} if any candidate lacks an answer.
std::string majority_vote(const CandidatePool& pool);

struct AnswerTally {
  std::string answer;
  double total = 0.0;
  std::size_t votes = 0;
  std::size_t first_index = 0;  // index of the earliest supporter
};

/// Vote weight of one score: (s + epsilon)^-1 for lower-is-confident
/// metrics, max(s, 0) for higher-is-confident ones.
double vote_weight(const ConfidenceScore& score, double epsilon);

/// Per-answer weighted totals in first-supporter order.
std::vector<AnswerTally> weighted_tally(const CandidatePool& pool, ScoreKind metric,
                                        double epsilon = kDefaultBordaEpsilon);

/// Weighted plurality: each candidate adds vote_weight() to its answer;
/// highest total wins, ties as in majority_vote.
std::string weighted_borda_vote(const CandidatePool& pool, ScoreKind metric,
                                double epsilon = kDefaultBordaEpsilon);

/// Average accuracy, correctness of the single most confident candidate, and
/// correctness of the majority answer. Throws Error{insufficient_labels}
/// unless every candidate carries a correctness label.
SelectionReport pool_metrics(const CandidatePool& pool, ScoreKind metric);

/// Correctness of `answer` as labelled on its earliest supporter, if any.
std::optional<bool> answer_correctness(const CandidatePool& pool, const std::string& answer);

}  // namespace edis
