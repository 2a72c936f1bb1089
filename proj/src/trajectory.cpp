#include "edis/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "edis/error.hpp"

namespace edis {

namespace {

constexpr double kDistributionSumTolerance = 1e-6;
constexpr double kTruncatedSumTolerance = 1e-9;

void check_probabilities(std::span<const double> probs, const char* what) {
  if (probs.empty()) {
    throw Error(ErrorCode::invalid_distribution, std::string(what) + ": empty probability vector");
  }
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw Error(ErrorCode::invalid_distribution,
                  std::string(what) + ": probability outside [0,1]: " + std::to_string(p));
    }
  }
}

void check_step(const TokenStep& step, std::size_t expected_position) {
  if (step.position != expected_position) {
    throw Error(ErrorCode::invalid_trajectory,
                "token positions must be consecutive from 1; expected " +
                    std::to_string(expected_position) + ", got " + std::to_string(step.position));
  }
  if (!std::isfinite(step.entropy) || step.entropy < 0.0) {
    throw Error(ErrorCode::invalid_trajectory,
                "entropy at position " + std::to_string(step.position) +
                    " must be finite and non-negative");
  }
  if (!step.top_probs) return;
  const auto& probs = *step.top_probs;
  check_probabilities(probs, "top_probs");
  if (!std::is_sorted(probs.begin(), probs.end(), std::greater<>())) {
    throw Error(ErrorCode::invalid_distribution,
                "top_probs at position " + std::to_string(step.position) +
                    " must be non-increasing");
  }
  const double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (sum > 1.0 + kTruncatedSumTolerance) {
    throw Error(ErrorCode::invalid_distribution,
                "top_probs at position " + std::to_string(step.position) + " sum to " +
                    std::to_string(sum) + " > 1");
  }
}

}  // namespace

EntropyTrajectory::EntropyTrajectory(std::vector<TokenStep> steps) : steps_(std::move(steps)) {
  if (steps_.empty()) {
    throw Error(ErrorCode::empty_trajectory, "trajectory must contain at least one token");
  }
  values_.reserve(steps_.size());
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    check_step(steps_[i], i + 1);
    values_.push_back(steps_[i].entropy);
  }
}

EntropyTrajectory EntropyTrajectory::from_entropies(std::span<const double> entropies) {
  std::vector<TokenStep> steps;
  steps.reserve(entropies.size());
  for (std::size_t i = 0; i < entropies.size(); ++i) {
    steps.push_back(TokenStep{.position = i + 1, .entropy = entropies[i]});
  }
  return EntropyTrajectory(std::move(steps));
}

bool EntropyTrajectory::has_token_text() const noexcept {
  return std::all_of(steps_.begin(), steps_.end(),
                     [](const TokenStep& s) { return s.token_text.has_value(); });
}

void ResponseRecord::validate() const {
  if (correct && !answer) {
    throw Error(ErrorCode::invalid_trajectory,
                "response " + response_id + " has a correctness label but no answer");
  }
  if (vocab_size && *vocab_size == 0) {
    throw Error(ErrorCode::invalid_trajectory, "vocab_size must be positive");
  }
}

double entropy_from_distribution(std::span<const double> probs) {
  check_probabilities(probs, "distribution");
  const double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (sum <= 0.0) {
    throw Error(ErrorCode::invalid_distribution, "distribution has no probability mass");
  }
  if (std::abs(sum - 1.0) > kDistributionSumTolerance) {
    throw Error(ErrorCode::invalid_distribution,
                "distribution sums to " + std::to_string(sum) + ", expected 1");
  }
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) {
      const double q = p / sum;
      h -= q * std::log(q);
    }
  }
  return std::clamp(h, 0.0, std::log(static_cast<double>(probs.size())));
}

double entropy_from_truncated(std::span<const double> top_probs, TailMode mode) {
  check_probabilities(top_probs, "top_probs");
  const double sum = std::accumulate(top_probs.begin(), top_probs.end(), 0.0);
  if (sum > 1.0 + kTruncatedSumTolerance) {
    throw Error(ErrorCode::invalid_distribution,
                "top_probs sum to " + std::to_string(sum) + " > 1");
  }
  if (sum <= 0.0) {
    throw Error(ErrorCode::invalid_distribution, "top_probs have no probability mass");
  }
  std::vector<double> full(top_probs.begin(), top_probs.end());
  if (mode == TailMode::renormalize) {
    for (double& p : full) p /= sum;
  } else if (sum < 1.0) {
    full.push_back(1.0 - sum);
  }
  return entropy_from_distribution(full);
}

double mean_entropy(std::span<const double> entropies) {
  if (entropies.empty()) {
    throw Error(ErrorCode::empty_trajectory, "mean of an empty trajectory");
  }
  const double sum = std::accumulate(entropies.begin(), entropies.end(), 0.0);
  return sum / static_cast<double>(entropies.size());
}

double mean_entropy(const EntropyTrajectory& traj) { return mean_entropy(traj.entropies()); }

double entropy_variance(std::span<const double> entropies) {
  const double mean = mean_entropy(entropies);
  double acc = 0.0;
  for (double h : entropies) {
    const double d = h - mean;
    acc += d * d;
  }
  return acc / static_cast<double>(entropies.size());
}

double entropy_variance(const EntropyTrajectory& traj) {
  return entropy_variance(traj.entropies());
}

}  // namespace edis
