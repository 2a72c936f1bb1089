#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace edis {

/// One generation step. `entropy` is in nats.
///
/// `top_probs`, when present, holds the observed probabilities of the most
/// likely vocabulary items in descending order. It may cover the full support
/// (sums to 1) or only a truncated head.
struct TokenStep {
  std::size_t position = 0;  // 1-based
  double entropy = 0.0;
  std::optional<std::string> token_text;
  std::optional<std::vector<double>> top_probs;

  bool operator==(const TokenStep&) const = default;
};

/// Ordered per-token entropies H_1..H_T of one generation, T >= 1.
///
/// Construction validates every step: positions are 1..T, entropies are
/// finite and non-negative, and top_probs (if any) lie in [0,1], are
/// non-increasing and sum to at most 1 + 1e-9.
class EntropyTrajectory {
 public:
  explicit EntropyTrajectory(std::vector<TokenStep> steps);

  static EntropyTrajectory from_entropies(std::span<const double> entropies);
  static EntropyTrajectory from_entropies(std::initializer_list<double> entropies) {
    return from_entropies(std::span<const double>(entropies.begin(), entropies.size()));
  }

  std::size_t size() const noexcept { return steps_.size(); }
  std::span<const TokenStep> steps() const noexcept { return steps_; }
  std::span<const double> entropies() const noexcept { return values_; }
  bool has_token_text() const noexcept;

  bool operator==(const EntropyTrajectory& other) const { return steps_ == other.steps_; }

 private:
  std::vector<TokenStep> steps_;
  std::vector<double> values_;
};

/// One candidate response for a prompt.
struct ResponseRecord {
  std::string prompt_id;
  std::string response_id;
  EntropyTrajectory trajectory;
  std::optional<std::string> answer;
  std::optional<bool> correct;
  std::optional<double> reward;
  std::optional<std::uint64_t> vocab_size;

  // Throws Error{invalid_trajectory} when `correct` is set without `answer`
  // or vocab_size is zero.
  void validate() const;

  bool operator==(const ResponseRecord&) const = default;
};

enum class TailMode { renormalize, single_bucket };

/// Shannon entropy -sum p ln p in nats, with 0 ln 0 = 0. The input is
/// renormalized when its sum is within 1e-6 of 1.
double entropy_from_distribution(std::span<const double> probs);

/// Entropy from a truncated head of the distribution. `renormalize` scales
/// the head to sum 1; `single_bucket` adds the residual mass 1 - sum as one
/// extra outcome.
double entropy_from_truncated(std::span<const double> top_probs, TailMode mode);

double mean_entropy(std::span<const double> entropies);
double mean_entropy(const EntropyTrajectory& traj);

/// Population variance (divides by T).
double entropy_variance(std::span<const double> entropies);
double entropy_variance(const EntropyTrajectory& traj);

}  // namespace edis
