#include "edis/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "edis/error.hpp"

namespace edis {

namespace {

constexpr Rgb kGreen{0, 255, 0};
constexpr Rgb kYellow{255, 255, 0};
constexpr Rgb kRed{255, 0, 0};
constexpr Rgb kLightGreen{144, 238, 144};
constexpr Rgb kOrange{255, 165, 0};

Rgb lerp(Rgb a, Rgb b, double t) {
  auto mix = [t](int x, int y) {
    return static_cast<int>(std::lround(x + (y - x) * t));
  };
  return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

std::string html_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string full_precision(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Rgb entropy_color(double entropy, double cap) {
  const double t = std::clamp(entropy / cap, 0.0, 1.0);
  if (t <= 0.5) return lerp(kGreen, kYellow, t * 2.0);
  return lerp(kYellow, kRed, (t - 0.5) * 2.0);
}

Rgb spike_color(SpikeStatus status) {
  switch (status) {
    case SpikeStatus::none: return kLightGreen;
    case SpikeStatus::burst_only:
    case SpikeStatus::rebound_only: return kYellow;
    case SpikeStatus::both: return kOrange;
  }
  return kLightGreen;
}

std::string to_hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

double heatmap_entropy_cap(const EntropyTrajectory& traj) {
  const auto h = traj.entropies();
  return std::max(*std::max_element(h.begin(), h.end()), 1.0);
}

std::string render_heatmap(const ResponseRecord& record, const SpikeConfig& cfg) {
  const auto& traj = record.trajectory;
  if (!traj.has_token_text()) {
    throw Error(ErrorCode::missing_text,
                "heatmap for response " + record.response_id + " needs text on every token");
  }
  const double cap = heatmap_entropy_cap(traj);
  const auto report = spike_report(traj, cfg);
  const auto steps = traj.steps();
  const std::string title = html_escape(record.prompt_id + " / " + record.response_id);

  std::ostringstream html;
  html << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>" << title
       << "</title>\n<style>\n"
       << "body{font-family:monospace;margin:1em}\n"
       << ".panel{margin-bottom:1.5em;line-height:1.8}\n"
       << ".tok{white-space:pre;padding:1px 0}\n"
       << "table{border-collapse:collapse}td{padding:2px 8px}\n"
       << "</style></head><body>\n";
  html << "<h1>" << title << "</h1>\n";

  html << "<h2>Entropy</h2>\n<div class=\"panel\" id=\"entropy\">";
  for (const auto& s : steps) {
    html << "<span class=\"tok\" data-pos=\"" << s.position << "\" title=\"H="
         << full_precision(s.entropy) << "\" style=\"background:"
         << to_hex(entropy_color(s.entropy, cap)) << "\">" << html_escape(*s.token_text)
         << "</span>";
  }
  html << "</div>\n";

  html << "<h2>Spikes</h2>\n<div class=\"panel\" id=\"spikes\">";
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto status = report.per_token_status[i];
    html << "<span class=\"tok\" data-pos=\"" << steps[i].position << "\" data-status=\""
         << to_string(status) << "\" style=\"background:" << to_hex(spike_color(status)) << "\">"
         << html_escape(*steps[i].token_text) << "</span>";
  }
  html << "</div>\n";

  html << "<table id=\"footer\">\n"
       << "<tr><td>EDIS</td><td id=\"edis\">" << full_precision(edis(traj, cfg)) << "</td></tr>\n"
       << "<tr><td>mean entropy</td><td id=\"mean_entropy\">"
       << full_precision(mean_entropy(traj)) << "</td></tr>\n"
       << "<tr><td>burst spikes</td><td id=\"burst\">" << report.burst_count << "</td></tr>\n"
       << "<tr><td>rebound spikes</td><td id=\"rebound\">" << report.rebound_count
       << "</td></tr>\n"
       << "<tr><td>entropy cap</td><td id=\"cap\">" << full_precision(cap) << "</td></tr>\n"
       << "</table>\n</body></html>\n";
  return html.str();
}

void export_heatmap(const ResponseRecord& record, const SpikeConfig& cfg,
                    const std::filesystem::path& out_path) {
  const std::string page = render_heatmap(record, cfg);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + out_path.string());
  out << page;
  if (!out) throw Error(ErrorCode::io, "failed writing " + out_path.string());
}

}  // namespace edis
