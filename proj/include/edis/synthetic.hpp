#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edis/spikes.hpp"
#include "edis/trajectory.hpp"

namespace edis {

enum class ProfileKind { stable, burst, rebound, mixed };

std::string_view to_string(ProfileKind kind) noexcept;
std::optional<ProfileKind> parse_profile_kind(std::string_view name) noexcept;

/// Shape of generated entropy trajectories.
///
/// Every trajectory starts as `base_entropy` plus Gaussian noise of scale
/// `noise_scale` (clamped at 0). Non-stable kinds then inject instability
/// events into disjoint segments:
///   burst   - a linear ramp of height 1.5 * tau_burst over `window` tokens
///   rebound - a two-token valley at base/4 followed by a jump of
///             1.5 * tau_rebound above the valley
///   mixed   - alternating burst and rebound events
/// Stable records are labelled correct, all others incorrect.
struct SyntheticProfile {
  ProfileKind kind = ProfileKind::stable;
  std::size_t min_length = 48;
  std::size_t max_length = 96;
  double base_entropy = 0.3;
  double noise_scale = 0.0;
  std::size_t min_events = 1;
  std::size_t max_events = 1;
  std::uint64_t seed = 0;

  // Throws Error{invalid_profile}.
  void validate(const SpikeConfig& spike) const;

  // Tokens an injected event occupies for the given window.
  static std::size_t event_span(const SpikeConfig& spike) { return spike.window + 6; }
};

struct SyntheticOptions {
  SpikeConfig spike;               // thresholds the events are sized against
  std::size_t prompts = 1;         // records are dealt round-robin over prompts
  std::string prompt_prefix = "p";
  std::string id_prefix;           // prepended to "<kind>-<index>" response ids
  std::uint64_t vocab_size = 32000;
  bool with_text = false;          // emit placeholder token text
};

std::vector<ResponseRecord> generate_synthetic(const SyntheticProfile& profile, std::size_t count,
                                               const SyntheticOptions& options = {});

struct ProfileCount {
  SyntheticProfile profile;
  std::size_t count = 0;
};

/// Generates each component with its own profile seed, then shuffles the
/// combined list with `shuffle_seed` when there is more than one component.
std::vector<ResponseRecord> generate_mixture(std::span<const ProfileCount> components,
                                             const SyntheticOptions& options,
                                             std::uint64_t shuffle_seed);

/// Correct answer string used for prompt index `p`.
std::string synthetic_answer(std::size_t prompt_index);

}  // namespace edis
