#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "edis/curation.hpp"
#include "edis/rng.hpp"
#include "expect_error.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace edis;
using doctest::Approx;

namespace {

GroupBatch batch_of(std::initializer_list<GroupMember> ms, std::size_t target_n = 0) {
  GroupBatch b{"q", ms, target_n};
  if (target_n == 0) b.target_n = b.members.size();
  return b;
}

std::vector<oracle::Member> to_oracle(const GroupBatch& b) {
  std::vector<oracle::Member> out;
  for (const auto& m : b.members) out.push_back({m.edis, m.correct, m.reward});
  return out;
}

void check_against_oracle(const GroupBatch& b, double alpha) {
  const auto got = sequence_weights(b, alpha);
  const auto want = oracle::curation(to_oracle(b), alpha);
  for (std::size_t i = 0; i < b.members.size(); ++i) {
    const auto& w = got.members[i];
    CHECK(std::fabs(w.z - want.z[i]) <= 1e-9);
    CHECK(std::fabs(w.signed_s - want.s[i]) <= 1e-9);
    CHECK(std::fabs(w.raw_w - want.raw[i]) <= 1e-9);
    CHECK(std::fabs(w.norm_w - want.norm[i]) <= 1e-9);
    CHECK(std::fabs(w.advantage - want.adv[i]) <= 1e-9);
    CHECK(std::fabs(w.weighted_advantage - want.wadv[i]) <= 1e-9);
  }
}

}  // namespace

TEST_CASE("grpo advantage examples") {
  CHECK(grpo_advantage(std::vector<double>{1, 1, 1}) == std::vector<double>{0, 0, 0});
  CHECK(grpo_advantage(std::vector<double>{0, 1}) == std::vector<double>{-1, 1});
  CHECK(grpo_advantage(std::vector<double>{0, 0, 1, 1}) == std::vector<double>{-1, -1, 1, 1});
  CHECK(code_of([] { grpo_advantage(std::vector<double>{}); }) == ErrorCode::shape);
}

TEST_CASE("sequence filter examples") {
  const auto b = batch_of({{"c1", 1, true, 1}, {"c5", 5, true, 1}, {"i9", 9, false, 0}, {"i2", 2, false, 0}}, 2);
  CHECK(sequence_filter(b) == std::vector<std::string>{"c1", "i9"});

  const auto all = batch_of({{"a", 4, true, 1}, {"b", 1, true, 1}, {"c", 3, true, 1}, {"d", 2, true, 1}}, 3);
  CHECK(sequence_filter(all) == std::vector<std::string>{"b", "d", "c"});

  auto full = b;
  full.target_n = 4;
  auto kept = sequence_filter(full);
  std::sort(kept.begin(), kept.end());
  CHECK(kept == std::vector<std::string>{"c1", "c5", "i2", "i9"});

  auto over = b;
  over.target_n = 5;
  CHECK(code_of([&] { sequence_filter(over); }) == ErrorCode::size);
}

TEST_CASE("sequence filter falls back when one class runs out") {
  const auto b = batch_of({{"c", 2, true, 1}, {"i1", 1, false, 0}, {"i2", 7, false, 0}, {"i3", 4, false, 0}}, 4);
  CHECK(sequence_filter(b) == std::vector<std::string>{"c", "i2", "i3", "i1"});
}

TEST_CASE("sequence weights: uniform edis") {
  const auto b = batch_of({{"a", 2, true, 1}, {"b", 2, false, 0}, {"c", 2, true, 1}});
  const auto w = sequence_weights(b);
  CHECK(w.mixed);
  for (const auto& m : w.members) {
    CHECK(m.z == 0.0);
    CHECK(m.raw_w == Approx(1.0).epsilon(1e-12));
    CHECK(m.norm_w == Approx(1.0).epsilon(1e-12));
    CHECK(m.weighted_advantage == Approx(m.advantage).epsilon(1e-12));
  }
}

TEST_CASE("sequence weights: single-class groups are not reweighted") {
  const auto b = batch_of({{"a", 0.5, true, 1}, {"b", 7, true, 1}, {"c", 2, true, 1}});
  const auto w = sequence_weights(b);
  CHECK_FALSE(w.mixed);
  for (const auto& m : w.members) CHECK(m.norm_w == 1.0);
}

TEST_CASE("sequence weights: four-member fixture") {
  const auto b = batch_of({{"c0", 0, true, 1}, {"c3", 3, true, 1}, {"i0", 0, false, 0}, {"i3", 3, false, 0}});
  const auto w = sequence_weights(b, 1.8);
  CHECK(w.members[0].norm_w > w.members[1].norm_w);
  CHECK(w.members[3].norm_w > w.members[2].norm_w);
  check_against_oracle(b, 1.8);
  // ln1 and ln4 split evenly around their mean, so z = -1, 1, -1, 1.
  CHECK(w.members[0].z == Approx(-1.0).epsilon(1e-12));
  CHECK(w.members[1].z == Approx(1.0).epsilon(1e-12));
  const double hi = std::exp(1.0 / 1.8);
  const double lo = std::exp(-1.0 / 1.8);
  CHECK(w.members[0].raw_w == Approx(4.0 * hi / (2 * hi + 2 * lo)).epsilon(1e-12));
  CHECK(w.members[0].norm_w == Approx(2.0 * hi / (hi + lo)).epsilon(1e-12));
}

TEST_CASE("sequence weights with shared statistics") {
  const auto b = batch_of({{"a", 1, true, 1}, {"b", 4, false, 0}});
  const LogEdisStats stats{std::log(2.0), 1.0};
  const auto w = sequence_weights(b, 1.8, stats);
  CHECK(w.members[0].z == Approx(0.0).epsilon(1e-12));
  CHECK(w.members[1].z == Approx(std::log(5.0) - std::log(2.0)).epsilon(1e-12));

  const std::vector<GroupBatch> both{b, batch_of({{"c", 0, true, 1}})};
  const auto pooled = log_edis_stats(both);
  const double m = (std::log(2.0) + std::log(5.0) + 0.0) / 3.0;
  CHECK(pooled.mean == Approx(m).epsilon(1e-12));
}

TEST_CASE("weighted advantage") {
  CHECK(weighted_advantage(std::vector<double>{-1, 1}, std::vector<double>{2, 0.5}) ==
        std::vector<double>{-2, 0.5});
  CHECK(weighted_advantage(std::vector<double>{0.3, -0.2}, std::vector<double>{1, 1}) ==
        std::vector<double>{0.3, -0.2});
  CHECK(weighted_advantage(std::vector<double>{0, 0}, std::vector<double>{3, 9}) ==
        std::vector<double>{0, 0});
  CHECK(code_of([] { weighted_advantage(std::vector<double>{1}, std::vector<double>{1, 2}); }) ==
        ErrorCode::shape);
}

TEST_CASE("invalid batches") {
  CHECK(code_of([] { sequence_weights(GroupBatch{"q", {}, 0}); }) == ErrorCode::size);
  CHECK(code_of([] { sequence_weights(batch_of({{"a", -1, true, 1}})); }) == ErrorCode::domain);
  CHECK(code_of([] { sequence_weights(batch_of({{"a", 1, true, 1}}), 0.0); }) == ErrorCode::invalid_config);
}

TEST_CASE("property: weights match oracle and class sums") {
  Rng rng(501);
  for (int iter = 0; iter < 300; ++iter) {
    const auto b = gen::group(rng, 16, rng.uniform() < 0.8);
    const double alpha = 0.2 + 4.0 * rng.uniform();
    check_against_oracle(b, alpha);

    const auto w = sequence_weights(b, alpha);
    double raw = 0.0;
    double pos = 0.0;
    double neg = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < b.members.size(); ++i) {
      raw += w.members[i].raw_w;
      CHECK(w.members[i].raw_w > 0.0);
      if (b.members[i].correct) {
        pos += w.members[i].norm_w;
        ++n_pos;
      } else {
        neg += w.members[i].norm_w;
      }
    }
    CHECK(std::fabs(raw - static_cast<double>(b.members.size())) <= 1e-9);
    if (w.mixed) {
      CHECK(std::fabs(pos - static_cast<double>(n_pos)) <= 1e-9);
      CHECK(std::fabs(neg - static_cast<double>(b.members.size() - n_pos)) <= 1e-9);
    }
  }
}

TEST_CASE("property: weight direction follows correctness") {
  Rng rng(502);
  for (int iter = 0; iter < 300; ++iter) {
    const auto b = gen::group(rng);
    const auto w = sequence_weights(b);
    for (std::size_t i = 0; i < b.members.size(); ++i) {
      for (std::size_t j = 0; j < b.members.size(); ++j) {
        const auto& mi = b.members[i];
        const auto& mj = b.members[j];
        if (mi.correct != mj.correct || !(mi.edis < mj.edis)) continue;
        if (mi.correct) {
          CHECK(w.members[i].norm_w >= w.members[j].norm_w);
        } else {
          CHECK(w.members[i].norm_w <= w.members[j].norm_w);
        }
      }
    }
  }
}

TEST_CASE("property: large alpha flattens weights") {
  Rng rng(503);
  for (int iter = 0; iter < 100; ++iter) {
    const auto w = sequence_weights(gen::group(rng), 1e6);
    for (const auto& m : w.members) CHECK(std::fabs(m.raw_w - 1.0) <= 1e-3);
  }
}

TEST_CASE("property: advantages are standardized") {
  Rng rng(504);
  for (int iter = 0; iter < 300; ++iter) {
    std::vector<double> r(static_cast<std::size_t>(rng.uniform_int(2, 16)));
    for (auto& v : r) v = rng.uniform() < 0.5 ? 0.0 : rng.uniform() * 3.0;
    r[0] = 0.0;
    r[1] = 1.0;
    const auto a = grpo_advantage(r);
    CHECK(std::fabs(oracle::mean(a)) <= 1e-12);
    CHECK(std::fabs(std::sqrt(oracle::variance(a)) - 1.0) <= 1e-9);
  }
}

TEST_CASE("property: filter keeps the extremes") {
  Rng rng(505);
  for (int iter = 0; iter < 300; ++iter) {
    auto b = gen::group(rng, 16, false);
    b.target_n = static_cast<std::size_t>(rng.uniform_int(1, b.members.size()));
    const auto kept = sequence_filter_indices(b);
    CHECK(kept.size() == b.target_n);
    std::vector<bool> in(b.members.size(), false);
    for (auto i : kept) in[i] = true;
    double max_kept_c = -1, min_drop_c = 1e300, min_kept_i = 1e300, max_drop_i = -1;
    for (std::size_t i = 0; i < b.members.size(); ++i) {
      const auto& m = b.members[i];
      if (m.correct) {
        (in[i] ? max_kept_c : min_drop_c) = in[i] ? std::max(max_kept_c, m.edis) : std::min(min_drop_c, m.edis);
      } else {
        (in[i] ? min_kept_i : max_drop_i) = in[i] ? std::min(min_kept_i, m.edis) : std::max(max_drop_i, m.edis);
      }
    }
    CHECK(max_kept_c <= min_drop_c);
    CHECK(min_kept_i >= max_drop_i);
  }
}
