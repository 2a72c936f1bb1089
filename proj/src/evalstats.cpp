#include "edis/evalstats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "edis/error.hpp"

namespace edis {

namespace {

double mean_of(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  const double m = mean_of(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return acc / static_cast<double>(xs.size() - 1);
}

// Larger key means more confident.
double confidence_key(double score, Direction direction) {
  return direction == Direction::lower_is_confident ? -score : score;
}

// Sorted order of indices by key, ascending; ties by index.
std::vector<std::size_t> ascending_order(std::span<const double> keys) {
  std::vector<std::size_t> idx(keys.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  return idx;
}

// Twice the 1-based mid-rank of every element; always an integer.
std::vector<std::int64_t> doubled_midranks(std::span<const double> keys) {
  const auto order = ascending_order(keys);
  std::vector<std::int64_t> ranks(keys.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && keys[order[j]] == keys[order[i]]) ++j;
    // positions i..j-1 share ranks i+1..j; doubled average is i+1+j.
    const auto doubled = static_cast<std::int64_t>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = doubled;
    i = j;
  }
  return ranks;
}

}  // namespace

std::size_t LabeledScoreSet::count_correct() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(items.begin(), items.end(), [](const LabeledScore& s) { return s.correct; }));
}

double roc_auc(const LabeledScoreSet& set) {
  const std::size_t n_correct = set.count_correct();
  const std::size_t n_incorrect = set.items.size() - n_correct;
  if (n_correct == 0 || n_incorrect == 0) {
    throw Error(ErrorCode::degenerate_labels, "AUC needs both correct and incorrect items");
  }
  std::vector<double> keys;
  keys.reserve(set.items.size());
  for (const auto& it : set.items) keys.push_back(confidence_key(it.score, set.direction));
  const auto ranks = doubled_midranks(keys);

  std::int64_t rank_sum = 0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (set.items[i].correct) rank_sum += ranks[i];
  }
  const auto nc = static_cast<std::int64_t>(n_correct);
  // 2U = 2 * (wins + ties / 2)
  const std::int64_t twice_u = rank_sum - nc * (nc + 1);
  return static_cast<double>(twice_u) /
         (2.0 * static_cast<double>(n_correct) * static_cast<double>(n_incorrect));
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw Error(ErrorCode::undefined_correlation, "correlation needs two equal-length lists, n >= 2");
  }
  const double mx = mean_of(xs);
  const double my = mean_of(ys);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) {
    throw Error(ErrorCode::undefined_correlation, "correlation undefined for zero variance");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> midranks(std::span<const double> xs) {
  const auto doubled = doubled_midranks(xs);
  std::vector<double> out(doubled.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(doubled[i]) / 2.0;
  return out;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw Error(ErrorCode::undefined_correlation, "correlation needs two equal-length lists, n >= 2");
  }
  const auto rx = midranks(xs);
  const auto ry = midranks(ys);
  return pearson(rx, ry);
}

std::vector<RetentionPoint> retention_accuracy(const LabeledScoreSet& set,
                                               std::span<const double> fractions) {
  if (set.items.empty()) throw Error(ErrorCode::size, "retention of an empty set");
  const std::size_t n = set.items.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return more_confident(set.items[a].score, set.items[b].score, set.direction);
  });

  std::vector<RetentionPoint> out;
  for (double q : fractions) {
    if (!(q > 0.0 && q <= 1.0)) {
      throw Error(ErrorCode::domain, "retention fraction must be in (0, 1]: " + std::to_string(q));
    }
    // The slack keeps q*n products such as 0.3*10 from rounding up.
    auto kept = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n) - 1e-9));
    kept = std::clamp<std::size_t>(kept, 1, n);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < kept; ++i) {
      if (set.items[order[i]].correct) ++correct;
    }
    out.push_back({q, kept, static_cast<double>(correct) / static_cast<double>(kept)});
  }
  return out;
}

double cohens_d(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error(ErrorCode::undefined_effect, "Cohen's d needs at least two values per group");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double pooled_var =
      ((na - 1.0) * sample_variance(a) + (nb - 1.0) * sample_variance(b)) / (na + nb - 2.0);
  if (!(pooled_var > 0.0)) {
    throw Error(ErrorCode::undefined_effect, "Cohen's d undefined for zero pooled SD");
  }
  return (mean_of(b) - mean_of(a)) / std::sqrt(pooled_var);
}

double welch_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error(ErrorCode::undefined_effect, "Welch t needs at least two values per group");
  }
  const double se2 = sample_variance(a) / static_cast<double>(a.size()) +
                     sample_variance(b) / static_cast<double>(b.size());
  if (!(se2 > 0.0)) throw Error(ErrorCode::undefined_effect, "Welch t undefined for zero variance");
  return (mean_of(b) - mean_of(a)) / std::sqrt(se2);
}

double spike_ratio(std::span<const double> correct_counts,
                   std::span<const double> incorrect_counts) {
  if (correct_counts.empty() || incorrect_counts.empty()) {
    throw Error(ErrorCode::size, "spike ratio needs both groups nonempty");
  }
  const double mc = mean_of(correct_counts);
  if (!(mc > 0.0)) {
    throw Error(ErrorCode::undefined_ratio, "spike ratio undefined: correct mean is zero");
  }
  return mean_of(incorrect_counts) / mc;
}

double discrimination_ratio(double score_a, double score_b) {
  auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!ok(score_a) || !ok(score_b)) {
    throw Error(ErrorCode::domain, "discrimination ratio needs two positive values");
  }
  return std::max(score_a, score_b) / std::min(score_a, score_b);
}

CheckpointSummary spike_ratio_series(std::span<const CheckpointPoint> series) {
  if (series.empty()) throw Error(ErrorCode::size, "checkpoint series is empty");
  CheckpointSummary out;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& p = series[i];
    if (i > 0 && p.step <= series[i - 1].step) {
      throw Error(ErrorCode::domain, "checkpoint steps must be strictly increasing");
    }
    if (!(p.mean_spikes_correct >= 0.0) || !(p.mean_spikes_incorrect >= 0.0)) {
      throw Error(ErrorCode::domain, "checkpoint spike means must be non-negative");
    }
    const double c = p.mean_spikes_correct;
    const double inc = p.mean_spikes_incorrect;
    out.ratios.push_back({p.step, spike_ratio(std::span(&c, 1), std::span(&inc, 1))});
  }
  std::vector<double> r;
  for (const auto& x : out.ratios) r.push_back(x.ratio);
  out.mean = mean_of(r);
  double acc = 0.0;
  for (double x : r) acc += (x - out.mean) * (x - out.mean);
  out.sd = std::sqrt(acc / static_cast<double>(r.size()));
  out.min = *std::min_element(r.begin(), r.end());
  out.max = *std::max_element(r.begin(), r.end());
  return out;
}

}  // namespace edis
