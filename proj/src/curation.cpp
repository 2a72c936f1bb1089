#include "edis/curation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "edis/error.hpp"

namespace edis {

namespace {

constexpr double kDegenerateSd = 1e-12;

struct MeanSd {
  double mean;
  double sd;
};

MeanSd population_stats(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return {mean, std::sqrt(acc / n)};
}

void append_log_edis(const GroupBatch& batch, std::vector<double>& out) {
  for (const auto& m : batch.members) out.push_back(std::log(m.edis + 1.0));
}

}  // namespace

void GroupBatch::validate() const {
  if (members.empty()) throw Error(ErrorCode::size, "group " + prompt_id + " has no members");
  for (const auto& m : members) {
    if (!std::isfinite(m.edis) || m.edis < 0.0) {
      throw Error(ErrorCode::domain, "member " + m.response_id + " has invalid EDIS");
    }
    if (!std::isfinite(m.reward)) {
      throw Error(ErrorCode::domain, "member " + m.response_id + " has non-finite reward");
    }
  }
}

LogEdisStats log_edis_stats(const GroupBatch& batch) {
  return log_edis_stats(std::span<const GroupBatch>(&batch, 1));
}

LogEdisStats log_edis_stats(std::span<const GroupBatch> batches) {
  std::vector<double> logs;
  for (const auto& b : batches) {
    b.validate();
    append_log_edis(b, logs);
  }
  const auto s = population_stats(logs);
  return {s.mean, s.sd};
}

std::vector<double> grpo_advantage(std::span<const double> rewards) {
  if (rewards.empty()) throw Error(ErrorCode::shape, "advantage of an empty group");
  const auto s = population_stats(rewards);
  std::vector<double> adv(rewards.size(), 0.0);
  if (s.sd < kDegenerateSd) return adv;
  for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - s.mean) / s.sd;
  return adv;
}

std::vector<std::size_t> sequence_filter_indices(const GroupBatch& batch) {
  batch.validate();
  const std::size_t n = batch.members.size();
  if (batch.target_n > n) {
    throw Error(ErrorCode::size, "target_n=" + std::to_string(batch.target_n) +
                                     " exceeds member count " + std::to_string(n));
  }

  std::vector<std::size_t> stable_correct;
  std::vector<std::size_t> unstable_incorrect;
  for (std::size_t i = 0; i < n; ++i) {
    (batch.members[i].correct ? stable_correct : unstable_incorrect).push_back(i);
  }
  const auto& m = batch.members;
  std::stable_sort(stable_correct.begin(), stable_correct.end(),
                   [&](std::size_t a, std::size_t b) { return m[a].edis < m[b].edis; });
  std::stable_sort(unstable_incorrect.begin(), unstable_incorrect.end(),
                   [&](std::size_t a, std::size_t b) { return m[a].edis > m[b].edis; });

  std::vector<std::size_t> kept;
  kept.reserve(batch.target_n);
  std::size_t ci = 0;
  std::size_t ii = 0;
  bool take_correct = true;
  while (kept.size() < batch.target_n) {
    const bool correct_left = ci < stable_correct.size();
    const bool incorrect_left = ii < unstable_incorrect.size();
    if ((take_correct && correct_left) || !incorrect_left) {
      kept.push_back(stable_correct[ci++]);
    } else {
      kept.push_back(unstable_incorrect[ii++]);
    }
    take_correct = !take_correct;
  }
  return kept;
}

std::vector<std::string> sequence_filter(const GroupBatch& batch) {
  std::vector<std::string> ids;
  for (std::size_t i : sequence_filter_indices(batch)) ids.push_back(batch.members[i].response_id);
  return ids;
}

CurationWeights sequence_weights(const GroupBatch& batch, double alpha) {
  return sequence_weights(batch, alpha, log_edis_stats(batch));
}

CurationWeights sequence_weights(const GroupBatch& batch, double alpha,
                                 const LogEdisStats& stats) {
  batch.validate();
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::invalid_config, "alpha must be finite and > 0");
  }
  const std::size_t n = batch.members.size();
  CurationWeights out;
  out.members.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    auto& w = out.members[i];
    const auto& m = batch.members[i];
    w.z = stats.sd < kDegenerateSd ? 0.0 : (std::log(m.edis + 1.0) - stats.mean) / stats.sd;
    w.signed_s = m.correct ? -w.z : w.z;
  }

  // Softmax over s / alpha, scaled to sum to n.
  double max_logit = -INFINITY;
  for (const auto& w : out.members) max_logit = std::max(max_logit, w.signed_s / alpha);
  double denom = 0.0;
  for (auto& w : out.members) {
    w.raw_w = std::exp(w.signed_s / alpha - max_logit);
    denom += w.raw_w;
  }
  for (auto& w : out.members) w.raw_w = w.raw_w / denom * static_cast<double>(n);

  std::size_t n_correct = 0;
  double sum_correct = 0.0;
  double sum_incorrect = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (batch.members[i].correct) {
      ++n_correct;
      sum_correct += out.members[i].raw_w;
    } else {
      sum_incorrect += out.members[i].raw_w;
    }
  }
  const std::size_t n_incorrect = n - n_correct;
  out.mixed = n_correct > 0 && n_incorrect > 0;

  for (std::size_t i = 0; i < n; ++i) {
    auto& w = out.members[i];
    if (!out.mixed) {
      w.norm_w = 1.0;
    } else if (batch.members[i].correct) {
      w.norm_w = w.raw_w / sum_correct * static_cast<double>(n_correct);
    } else {
      w.norm_w = w.raw_w / sum_incorrect * static_cast<double>(n_incorrect);
    }
  }

  std::vector<double> rewards(n);
  std::vector<double> norm(n);
  for (std::size_t i = 0; i < n; ++i) {
    rewards[i] = batch.members[i].reward;
    norm[i] = out.members[i].norm_w;
  }
  const auto adv = grpo_advantage(rewards);
  const auto weighted = weighted_advantage(adv, norm);
  for (std::size_t i = 0; i < n; ++i) {
    out.members[i].advantage = adv[i];
    out.members[i].weighted_advantage = weighted[i];
  }
  return out;
}

std::vector<double> weighted_advantage(std::span<const double> advantages,
                                       std::span<const double> norm_weights) {
  if (advantages.size() != norm_weights.size()) {
    throw Error(ErrorCode::shape, "advantages and weights differ in length");
  }
  std::vector<double> out(advantages.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = advantages[i] * norm_weights[i];
  return out;
}

}  // namespace edis
