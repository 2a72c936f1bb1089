#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "edis/trajectory.hpp"

namespace edis {

/// Spike detector parameters. Thresholds are in nats.
struct SpikeConfig {
  std::size_t window = 5;
  double tau_burst = 1.36;
  double tau_rebound = 1.33;
  double tau_diff = 0.7;

  // Throws Error{invalid_config} unless window >= 1 and all thresholds > 0.
  void validate() const;

  bool operator==(const SpikeConfig&) const = default;
};

enum class SpikeStatus { none, burst_only, rebound_only, both };

std::string_view to_string(SpikeStatus status) noexcept;

struct SpikeReport {
  std::size_t burst_count = 0;
  std::size_t rebound_count = 0;
  double combined_score = 0.0;  // (burst + rebound) / 2
  std::vector<SpikeStatus> per_token_status;
};

// Windows t in 1..T-w with H[t+w] - H[t] > tau_burst. Zero when T <= w.
std::size_t burst_spike_count(std::span<const double> entropies, const SpikeConfig& cfg);

// Positions t in 2..T with H[t] - min_{s<t} H[s] > tau_rebound.
std::size_t rebound_spike_count(std::span<const double> entropies, const SpikeConfig& cfg);

// Positions t in 1..T-1 with |H[t+1] - H[t]| > tau_diff.
std::size_t simple_diff_spike_count(std::span<const double> entropies, const SpikeConfig& cfg);

/// S(H) * (1 + Var(H)) where S(H) is the mean of the burst and rebound
/// counts and Var is the population variance of the trajectory.
double edis(std::span<const double> entropies, const SpikeConfig& cfg);

/// Per-token spike attribution for rendering. A burst whose window starts
/// at t flags position t+w; a rebound at t flags t.
std::vector<SpikeStatus> spike_status_map(std::span<const double> entropies,
                                          const SpikeConfig& cfg);

SpikeReport spike_report(std::span<const double> entropies, const SpikeConfig& cfg);

inline std::size_t burst_spike_count(const EntropyTrajectory& t, const SpikeConfig& cfg) {
  return burst_spike_count(t.entropies(), cfg);
}
inline std::size_t rebound_spike_count(const EntropyTrajectory& t, const SpikeConfig& cfg) {
  return rebound_spike_count(t.entropies(), cfg);
}
inline std::size_t simple_diff_spike_count(const EntropyTrajectory& t, const SpikeConfig& cfg) {
  return simple_diff_spike_count(t.entropies(), cfg);
}
inline double edis(const EntropyTrajectory& t, const SpikeConfig& cfg) {
  return edis(t.entropies(), cfg);
}
inline std::vector<SpikeStatus> spike_status_map(const EntropyTrajectory& t,
                                                 const SpikeConfig& cfg) {
  return spike_status_map(t.entropies(), cfg);
}
inline SpikeReport spike_report(const EntropyTrajectory& t, const SpikeConfig& cfg) {
  return spike_report(t.entropies(), cfg);
}

}  // namespace edis
