#include "edis/spikes.hpp"

#include <cmath>
#include <string>

#include "edis/error.hpp"

namespace edis {

void SpikeConfig::validate() const {
  if (window < 1) throw Error(ErrorCode::invalid_config, "window must be >= 1");
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(tau_burst) || !positive(tau_rebound) || !positive(tau_diff)) {
    throw Error(ErrorCode::invalid_config, "spike thresholds must be finite and > 0");
  }
}

std::string_view to_string(SpikeStatus status) noexcept {
  switch (status) {
    case SpikeStatus::none: return "none";
    case SpikeStatus::burst_only: return "burst_only";
    case SpikeStatus::rebound_only: return "rebound_only";
    case SpikeStatus::both: return "both";
  }
  return "none";
}

std::size_t burst_spike_count(std::span<const double> h, const SpikeConfig& cfg) {
  const std::size_t w = cfg.window;
  if (h.size() <= w) return 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i + w < h.size(); ++i) {
    if (h[i + w] - h[i] > cfg.tau_burst) ++count;
  }
  return count;
}

std::size_t rebound_spike_count(std::span<const double> h, const SpikeConfig& cfg) {
  if (h.size() < 2) return 0;
  std::size_t count = 0;
  double running_min = h[0];
  for (std::size_t i = 1; i < h.size(); ++i) {
    if (h[i] - running_min > cfg.tau_rebound) ++count;
    running_min = std::min(running_min, h[i]);
  }
  return count;
}

std::size_t simple_diff_spike_count(std::span<const double> h, const SpikeConfig& cfg) {
  std::size_t count = 0;
  for (std::size_t i = 0; i + 1 < h.size(); ++i) {
    if (std::abs(h[i + 1] - h[i]) > cfg.tau_diff) ++count;
  }
  return count;
}

double edis(std::span<const double> h, const SpikeConfig& cfg) {
  const std::size_t bursts = burst_spike_count(h, cfg);
  const std::size_t rebounds = rebound_spike_count(h, cfg);
  if (bursts + rebounds == 0) return 0.0;
  const double combined = static_cast<double>(bursts + rebounds) / 2.0;
  return combined * (1.0 + entropy_variance(h));
}

std::vector<SpikeStatus> spike_status_map(std::span<const double> h, const SpikeConfig& cfg) {
  std::vector<bool> burst(h.size(), false);
  std::vector<bool> rebound(h.size(), false);

  const std::size_t w = cfg.window;
  for (std::size_t i = 0; i + w < h.size(); ++i) {
    if (h[i + w] - h[i] > cfg.tau_burst) burst[i + w] = true;
  }
  if (!h.empty()) {
    double running_min = h[0];
    for (std::size_t i = 1; i < h.size(); ++i) {
      if (h[i] - running_min > cfg.tau_rebound) rebound[i] = true;
      running_min = std::min(running_min, h[i]);
    }
  }

  std::vector<SpikeStatus> status(h.size(), SpikeStatus::none);
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (burst[i] && rebound[i]) {
      status[i] = SpikeStatus::both;
    } else if (burst[i]) {
      status[i] = SpikeStatus::burst_only;
    } else if (rebound[i]) {
      status[i] = SpikeStatus::rebound_only;
    }
  }
  return status;
}

SpikeReport spike_report(std::span<const double> h, const SpikeConfig& cfg) {
  SpikeReport report;
  report.burst_count = burst_spike_count(h, cfg);
  report.rebound_count = rebound_spike_count(h, cfg);
  report.combined_score = static_cast<double>(report.burst_count + report.rebound_count) / 2.0;
  report.per_token_status = spike_status_map(h, cfg);
  return report;
}

}  // namespace edis
