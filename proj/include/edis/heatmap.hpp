#pragma once

#include <filesystem>
#include <string>

#include "edis/spikes.hpp"
#include "edis/trajectory.hpp"

namespace edis {

struct Rgb {
  int r = 0;
  int g = 0;
  int b = 0;

  bool operator==(const Rgb&) const = default;
};

/// Green at 0, yellow at cap/2, red at cap, linear in between; values are
/// clamped into [0, cap].
Rgb entropy_color(double entropy, double cap);

/// Light green / yellow / orange for none / one spike type / both.
Rgb spike_color(SpikeStatus status);

std::string to_hex(Rgb c);

/// max(trajectory maximum, 1 nat).
double heatmap_entropy_cap(const EntropyTrajectory& traj);

/// Standalone HTML page with an entropy panel, a spike panel and a footer
/// holding EDIS, mean entropy and spike counts (printed with 17 significant
/// digits). Throws Error{missing_text} unless every token has text.
std::string render_heatmap(const ResponseRecord& record, const SpikeConfig& cfg);

void export_heatmap(const ResponseRecord& record, const SpikeConfig& cfg,
                    const std::filesystem::path& out_path);

}  // namespace edis
