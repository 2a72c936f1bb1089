#include "edis/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "edis/error.hpp"
#include "edis/rng.hpp"

namespace edis {

std::string_view to_string(ProfileKind kind) noexcept {
  switch (kind) {
    case ProfileKind::stable: return "stable";
    case ProfileKind::burst: return "burst";
    case ProfileKind::rebound: return "rebound";
    case ProfileKind::mixed: return "mixed";
  }
  return "stable";
}

std::optional<ProfileKind> parse_profile_kind(std::string_view name) noexcept {
  for (auto k : {ProfileKind::stable, ProfileKind::burst, ProfileKind::rebound, ProfileKind::mixed}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

void SyntheticProfile::validate(const SpikeConfig& spike) const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::invalid_profile, msg); };
  spike.validate();
  if (min_length < 1 || min_length > max_length) fail("length range must satisfy 1 <= min <= max");
  if (!std::isfinite(base_entropy) || base_entropy < 0.0) fail("base entropy must be >= 0");
  if (!std::isfinite(noise_scale) || noise_scale < 0.0) fail("noise scale must be >= 0");
  if (min_events > max_events) fail("event range must satisfy min <= max");
  if (kind == ProfileKind::stable) return;
  if (min_events < 1) fail("non-stable profiles need at least one event");
  const std::size_t needed = 1 + max_events * event_span(spike);
  if (min_length < needed) {
    fail("min length " + std::to_string(min_length) + " cannot hold " +
         std::to_string(max_events) + " events; need >= " + std::to_string(needed));
  }
}

std::string synthetic_answer(std::size_t prompt_index) {
  return std::to_string(17 * (prompt_index + 1));
}

namespace {

void inject_burst(std::vector<double>& shape, std::size_t start, double base,
                  const SpikeConfig& spike) {
  const double height = 1.5 * spike.tau_burst;
  const std::size_t w = spike.window;
  for (std::size_t j = 0; j <= w; ++j) {
    shape[start + j] = base + height * static_cast<double>(j) / static_cast<double>(w);
  }
  shape[start + w + 1] = base + height;
  shape[start + w + 2] = base + height;
}

void inject_rebound(std::vector<double>& shape, std::size_t start, double base,
                    const SpikeConfig& spike) {
  const double valley = base / 4.0;
  const double peak = valley + 1.5 * spike.tau_rebound;
  shape[start] = valley;
  shape[start + 1] = valley;
  for (std::size_t j = 2; j <= 4; ++j) shape[start + j] = peak;
}

std::vector<double> make_shape(const SyntheticProfile& profile, const SpikeConfig& spike,
                               Rng& rng) {
  const auto length =
      static_cast<std::size_t>(rng.uniform_int(profile.min_length, profile.max_length));
  std::vector<double> shape(length, profile.base_entropy);
  if (profile.kind == ProfileKind::stable) return shape;

  const auto events =
      static_cast<std::size_t>(rng.uniform_int(profile.min_events, profile.max_events));
  const std::size_t span = SyntheticProfile::event_span(spike);
  // Position 0 stays at base so every event has a history before it.
  const std::size_t slot = (length - 1) / events;
  for (std::size_t e = 0; e < events; ++e) {
    const auto offset = static_cast<std::size_t>(rng.uniform_int(0, slot - span));
    const std::size_t start = 1 + e * slot + offset;
    const bool burst = profile.kind == ProfileKind::burst ||
                       (profile.kind == ProfileKind::mixed && e % 2 == 0);
    if (burst) {
      inject_burst(shape, start, profile.base_entropy, spike);
    } else {
      inject_rebound(shape, start, profile.base_entropy, spike);
    }
  }
  return shape;
}

}  // namespace

std::vector<ResponseRecord> generate_synthetic(const SyntheticProfile& profile, std::size_t count,
                                               const SyntheticOptions& options) {
  profile.validate(options.spike);
  if (count < 1) throw Error(ErrorCode::invalid_profile, "count must be >= 1");
  if (options.prompts < 1) throw Error(ErrorCode::invalid_profile, "prompts must be >= 1");
  if (options.vocab_size < 1) throw Error(ErrorCode::invalid_profile, "vocab_size must be >= 1");

  Rng rng(profile.seed);
  const bool correct = profile.kind == ProfileKind::stable;
  std::vector<ResponseRecord> out;
  out.reserve(count);

  for (std::size_t i = 0; i < count; ++i) {
    auto values = make_shape(profile, options.spike, rng);
    if (profile.noise_scale > 0.0) {
      for (double& v : values) v = std::max(0.0, v + profile.noise_scale * rng.normal());
    }

    std::vector<TokenStep> steps;
    steps.reserve(values.size());
    for (std::size_t t = 0; t < values.size(); ++t) {
      TokenStep step{.position = t + 1, .entropy = values[t]};
      if (options.with_text) step.token_text = "w" + std::to_string(t + 1) + " ";
      steps.push_back(std::move(step));
    }

    const std::size_t prompt = i % options.prompts;
    std::string answer = synthetic_answer(prompt);
    if (!correct) answer = std::to_string(17 * (prompt + 1) + 1 + rng.uniform_int(0, 2));

    out.push_back(ResponseRecord{
        .prompt_id = options.prompt_prefix + std::to_string(prompt),
        .response_id = options.id_prefix + std::string(to_string(profile.kind)) + "-" +
                       std::to_string(i),
        .trajectory = EntropyTrajectory(std::move(steps)),
        .answer = std::move(answer),
        .correct = correct,
        .reward = correct ? 1.0 : 0.0,
        .vocab_size = options.vocab_size,
    });
  }
  return out;
}

std::vector<ResponseRecord> generate_mixture(std::span<const ProfileCount> components,
                                             const SyntheticOptions& options,
                                             std::uint64_t shuffle_seed) {
  if (components.empty()) throw Error(ErrorCode::invalid_profile, "no profiles requested");
  std::vector<ResponseRecord> all;
  for (std::size_t c = 0; c < components.size(); ++c) {
    SyntheticOptions opts = options;
    if (components.size() > 1) opts.id_prefix = options.id_prefix + "c" + std::to_string(c) + "-";
    auto part = generate_synthetic(components[c].profile, components[c].count, opts);
    std::move(part.begin(), part.end(), std::back_inserter(all));
  }
  if (components.size() > 1) {
    Rng rng(shuffle_seed);
    rng.shuffle(all);
  }
  return all;
}

}  // namespace edis
