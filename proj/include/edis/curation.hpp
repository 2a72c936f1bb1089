#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace edis {

inline constexpr double kDefaultAlpha = 1.8;

struct GroupMember {
  std::string response_id;
  double edis = 0.0;
  bool correct = false;
  double reward = 0.0;
};

/// One prompt's sampled responses. For filtering, `target_n` is how many
/// survive out of the (oversampled) member list.
struct GroupBatch {
  std::string prompt_id;
  std::vector<GroupMember> members;
  std::size_t target_n = 0;

  // Nonempty; EDIS finite and non-negative; rewards finite.
  void validate() const;
};

struct MemberWeights {
  double z = 0.0;         // z-score of ln(EDIS + 1)
  double signed_s = 0.0;  // -z if correct, z otherwise
  double raw_w = 0.0;     // softmax(s / alpha) * n
  double norm_w = 0.0;    // raw_w renormalized within its correctness class
  double advantage = 0.0;
  double weighted_advantage = 0.0;
};

struct CurationWeights {
  std::vector<MemberWeights> members;  // parallel to GroupBatch::members
  bool mixed = false;                  // both correct and incorrect present
};

/// Mean and population SD of ln(EDIS + 1).
struct LogEdisStats {
  double mean = 0.0;
  double sd = 0.0;
};

LogEdisStats log_edis_stats(const GroupBatch& batch);
// Pooled over every member of every batch, for whole-batch z-scoring.
LogEdisStats log_edis_stats(std::span<const GroupBatch> batches);

/// (r - mean) / sd with population SD; all zeros when sd < 1e-12.
std::vector<double> grpo_advantage(std::span<const double> rewards);

/// Alternates between the most stable correct member (lowest EDIS first)
/// and the most unstable incorrect member (highest EDIS first), starting
/// with the correct list, until target_n are kept. When one list runs out
/// the other fills the rest. Returns member indices in selection order.
std::vector<std::size_t> sequence_filter_indices(const GroupBatch& batch);
std::vector<std::string> sequence_filter(const GroupBatch& batch);

/// Correctness-signed EDIS weighting with per-class renormalization and
/// weighted GRPO advantages. Groups with a single outcome class get
/// norm_w = 1 everywhere. z-scores use the group's own statistics unless
/// `stats` is supplied.
CurationWeights sequence_weights(const GroupBatch& batch, double alpha = kDefaultAlpha);
CurationWeights sequence_weights(const GroupBatch& batch, double alpha, const LogEdisStats& stats);

/// Elementwise product. Throws Error{shape} on length mismatch.
std::vector<double> weighted_advantage(std::span<const double> advantages,
                                       std::span<const double> norm_weights);

}  // namespace edis
