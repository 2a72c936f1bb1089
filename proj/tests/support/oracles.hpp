#pragma once

// Literal reference implementations used only by tests. They follow the
// textbook definitions term by term and favour obviousness over speed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace oracle {

// 1-based indexing throughout to mirror the written definitions.
inline double H(const std::vector<double>& h, std::size_t t) { return h[t - 1]; }

inline std::size_t burst(const std::vector<double>& h, std::size_t w, double tau) {
  const std::size_t T = h.size();
  std::size_t count = 0;
  for (std::size_t t = 1; t + w <= T; ++t) {
    if (H(h, t + w) - H(h, t) > tau) ++count;
  }
  return count;
}

inline std::size_t rebound(const std::vector<double>& h, double tau) {
  const std::size_t T = h.size();
  std::size_t count = 0;
  for (std::size_t t = 2; t <= T; ++t) {
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t s = 1; s < t; ++s) lo = std::min(lo, H(h, s));
    if (H(h, t) - lo > tau) ++count;
  }
  return count;
}

inline std::size_t diff(const std::vector<double>& h, double tau) {
  std::size_t count = 0;
  for (std::size_t t = 1; t < h.size(); ++t) {
    if (std::fabs(H(h, t + 1) - H(h, t)) > tau) ++count;
  }
  return count;
}

inline double mean(const std::vector<double>& h) {
  double s = 0.0;
  for (double v : h) s += v;
  return s / static_cast<double>(h.size());
}

inline double variance(const std::vector<double>& h) {
  const double m = mean(h);
  double s = 0.0;
  for (double v : h) s += (v - m) * (v - m);
  return s / static_cast<double>(h.size());
}

inline double edis(const std::vector<double>& h, std::size_t w, double tau_b, double tau_r) {
  const double S = (static_cast<double>(burst(h, w, tau_b)) + static_cast<double>(rebound(h, tau_r))) / 2.0;
  return S * (1.0 + variance(h));
}

// ---------------------------------------------------------------- curation

struct Member {
  double edis;
  bool correct;
  double reward;
};

struct Weights {
  std::vector<double> z, s, raw, norm, adv, wadv;
};

inline std::vector<double> advantage(const std::vector<double>& r) {
  const double mu = mean(r);
  const double sd = std::sqrt(variance(r));
  std::vector<double> out(r.size(), 0.0);
  if (sd < 1e-12) return out;
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = (r[i] - mu) / sd;
  return out;
}

// Straight-line pipeline: log z-score, sign by correctness, tempered
// softmax scaled by n, per-class renormalization, gating, weighted advantage.
inline Weights curation(const std::vector<Member>& g, double alpha) {
  const std::size_t n = g.size();
  Weights w;

  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::log(g[i].edis + 1.0);
  const double mu = mean(x);
  const double sd = std::sqrt(variance(x));
  w.z.assign(n, 0.0);
  if (sd >= 1e-12) {
    for (std::size_t i = 0; i < n; ++i) w.z[i] = (x[i] - mu) / sd;
  }

  w.s.resize(n);
  for (std::size_t i = 0; i < n; ++i) w.s[i] = g[i].correct ? -w.z[i] : w.z[i];

  double denom = 0.0;
  for (std::size_t i = 0; i < n; ++i) denom += std::exp(w.s[i] / alpha);
  w.raw.resize(n);
  for (std::size_t i = 0; i < n; ++i) w.raw[i] = std::exp(w.s[i] / alpha) / denom * static_cast<double>(n);

  std::size_t n_pos = 0;
  double sum_pos = 0.0;
  double sum_neg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (g[i].correct) {
      ++n_pos;
      sum_pos += w.raw[i];
    } else {
      sum_neg += w.raw[i];
    }
  }
  const std::size_t n_neg = n - n_pos;
  const bool mixed = n_pos > 0 && n_neg > 0;
  w.norm.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!mixed) {
      w.norm[i] = 1.0;
    } else if (g[i].correct) {
      w.norm[i] = w.raw[i] / sum_pos * static_cast<double>(n_pos);
    } else {
      w.norm[i] = w.raw[i] / sum_neg * static_cast<double>(n_neg);
    }
  }

  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = g[i].reward;
  w.adv = advantage(r);
  w.wadv.resize(n);
  for (std::size_t i = 0; i < n; ++i) w.wadv[i] = w.adv[i] * w.norm[i];
  return w;
}

// ---------------------------------------------------------------- voting

// Answers are small integers; `first` tracks earliest supporter.
inline int weighted_plurality(const std::vector<int>& answers, const std::vector<double>& weights) {
  std::map<int, double> total;
  std::map<int, std::size_t> first;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    total[answers[i]] += weights[i];
    if (!first.count(answers[i])) first[answers[i]] = i;
  }
  int best = answers[0];
  for (const auto& [a, t] : total) {
    if (t > total[best] || (t == total[best] && first[a] < first[best])) best = a;
  }
  return best;
}

inline int plurality(const std::vector<int>& answers) {
  return weighted_plurality(answers, std::vector<double>(answers.size(), 1.0));
}

// ---------------------------------------------------------------- auc

// Fraction of (correct, incorrect) pairs where the correct item is more
// confident; ties count one half. Returned as wins2 / (2 * pairs) to keep
// the numerator exact.
inline double auc(const std::vector<double>& scores, const std::vector<bool>& correct,
                  bool lower_is_confident) {
  long long wins2 = 0;
  long long pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!correct[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (correct[j]) continue;
      ++pairs;
      const bool better = lower_is_confident ? scores[i] < scores[j] : scores[i] > scores[j];
      if (better) wins2 += 2;
      else if (scores[i] == scores[j]) wins2 += 1;
    }
  }
  return static_cast<double>(wins2) / static_cast<double>(2 * pairs);
}

}  // namespace oracle
