#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "edis/confidence.hpp"

namespace edis {

struct LabeledScore {
  double score = 0.0;
  bool correct = false;
};

struct LabeledScoreSet {
  std::vector<LabeledScore> items;
  Direction direction = Direction::lower_is_confident;

  std::size_t count_correct() const noexcept;
};

/// Probability that a random correct item is ranked more confident than a
/// random incorrect one, ties counting one half. Computed from mid-ranks in
/// O(n log n). Throws Error{degenerate_labels} unless both labels occur.
double roc_auc(const LabeledScoreSet& set);

/// Throws Error{undefined_correlation} on length mismatch, n < 2 or a
/// zero-variance argument.
double pearson(std::span<const double> xs, std::span<const double> ys);
double spearman(std::span<const double> xs, std::span<const double> ys);

/// 1-based fractional ranks, ties receive their average rank.
std::vector<double> midranks(std::span<const double> xs);

struct RetentionPoint {
  double fraction = 0.0;
  std::size_t kept = 0;
  double accuracy = 0.0;
};

/// For each q keeps the ceil(q * n) most confident items (ties by input
/// order) and reports their accuracy.
std::vector<RetentionPoint> retention_accuracy(const LabeledScoreSet& set,
                                               std::span<const double> fractions);

/// (mean(b) - mean(a)) / pooled SD with (n - 1) weights.
double cohens_d(std::span<const double> a, std::span<const double> b);

/// Welch's t statistic for mean(b) - mean(a). No p-value.
double welch_t(std::span<const double> a, std::span<const double> b);

/// mean(incorrect) / mean(correct). Throws Error{undefined_ratio} when the
/// correct mean is zero.
double spike_ratio(std::span<const double> correct_counts,
                   std::span<const double> incorrect_counts);

/// max / min of two positive values.
double discrimination_ratio(double score_a, double score_b);

struct CheckpointPoint {
  std::int64_t step = 0;
  double mean_spikes_correct = 0.0;
  double mean_spikes_incorrect = 0.0;
};

struct CheckpointRatio {
  std::int64_t step = 0;
  double ratio = 0.0;
};

struct CheckpointSummary {
  std::vector<CheckpointRatio> ratios;
  double mean = 0.0;
  double sd = 0.0;  // population
  double min = 0.0;
  double max = 0.0;
};

/// Incorrect/correct spike ratio per checkpoint plus summary statistics.
/// Steps must be strictly increasing and means non-negative.
CheckpointSummary spike_ratio_series(std::span<const CheckpointPoint> series);

}  // namespace edis
