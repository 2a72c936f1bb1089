// End-to-end acceptance checks. Each criterion prints one [PASS]/[FAIL]
// line; the process exits nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "edis/cli.hpp"
#include "edis/curation.hpp"
#include "edis/evalstats.hpp"
#include "edis/rng.hpp"
#include "edis/selection.hpp"
#include "edis/spikes.hpp"
#include "edis/synthetic.hpp"
#include "edis/trace_io.hpp"
#include "generators.hpp"
#include "oracles.hpp"
#include "json.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

int g_failures = 0;

void report(const char* name, const std::function<Outcome()>& check) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o.fail(std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.ok) ++g_failures;
  std::printf("[%s] %s (%.2fs)%s%s\n", o.ok ? "PASS" : "FAIL", name, secs,
              o.detail.empty() ? "" : ": ", o.detail.c_str());
  std::fflush(stdout);
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = edis::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<json> rows_of(const std::string& text, const std::string& kind) {
  std::vector<json> v;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto j = json::parse(line);
    if (j.value("record", "") == kind) v.push_back(std::move(j));
  }
  return v;
}

fs::path workdir() {
  static const fs::path d = [] {
    auto p = fs::temp_directory_path() / "edis-acceptance";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return d;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------- checks

Outcome spike_oracles() {
  Outcome o;
  edis::Rng rng(1001);
  const auto t0 = std::chrono::steady_clock::now();
  for (int iter = 0; iter < 1000; ++iter) {
    const auto h = gen::trajectory(rng, 64);
    edis::SpikeConfig cfg;
    cfg.window = static_cast<std::size_t>(rng.uniform_int(1, 8));
    cfg.tau_burst = rng.uniform() < 0.5 ? 1.36 : 0.25 + 2.0 * rng.uniform();
    cfg.tau_rebound = rng.uniform() < 0.5 ? 1.33 : 0.25 + 2.0 * rng.uniform();
    cfg.tau_diff = rng.uniform() < 0.5 ? 0.7 : 0.25 + 2.0 * rng.uniform();

    if (edis::burst_spike_count(h, cfg) != oracle::burst(h, cfg.window, cfg.tau_burst)) o.fail("burst count");
    if (edis::rebound_spike_count(h, cfg) != oracle::rebound(h, cfg.tau_rebound)) o.fail("rebound count");
    if (edis::simple_diff_spike_count(h, cfg) != oracle::diff(h, cfg.tau_diff)) o.fail("diff count");
    if (std::fabs(edis::entropy_variance(h) - oracle::variance(h)) > 1e-12) o.fail("variance");
    const double e = edis::edis(h, cfg);
    const double want = oracle::edis(h, cfg.window, cfg.tau_burst, cfg.tau_rebound);
    if (std::fabs(e - want) > 1e-12) o.fail("edis " + fmt(e) + " vs " + fmt(want));
  }
  const double secs = elapsed_since(t0);
  if (secs >= 5.0) o.fail("took " + fmt(secs) + "s, limit 5s");
  return o;
}

Outcome curation_oracle() {
  Outcome o;
  edis::Rng rng(1002);
  std::size_t nondegenerate = 0;
  for (int iter = 0; iter < 500; ++iter) {
    const auto b = gen::group(rng, 16, true);
    const double alpha = rng.uniform() < 0.5 ? edis::kDefaultAlpha : 0.2 + 4.0 * rng.uniform();
    const auto got = edis::sequence_weights(b, alpha);

    std::vector<oracle::Member> ms;
    for (const auto& m : b.members) ms.push_back({m.edis, m.correct, m.reward});
    const auto want = oracle::curation(ms, alpha);

    const std::size_t n = b.members.size();
    double raw_sum = 0.0;
    double pos_sum = 0.0;
    double neg_sum = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& w = got.members[i];
      const double diffs[] = {w.z - want.z[i],       w.signed_s - want.s[i],
                              w.raw_w - want.raw[i], w.norm_w - want.norm[i],
                              w.advantage - want.adv[i], w.weighted_advantage - want.wadv[i]};
      for (double d : diffs) {
        if (std::fabs(d) > 1e-9) o.fail("field mismatch in batch " + std::to_string(iter));
      }
      raw_sum += w.raw_w;
      if (b.members[i].correct) {
        pos_sum += w.norm_w;
        ++n_pos;
      } else {
        neg_sum += w.norm_w;
      }
    }
    if (!got.mixed) o.fail("generator produced an unmixed batch");
    if (std::fabs(raw_sum - static_cast<double>(n)) > 1e-9) o.fail("raw weight sum");
    if (std::fabs(pos_sum - static_cast<double>(n_pos)) > 1e-9) o.fail("correct-class weight sum");
    if (std::fabs(neg_sum - static_cast<double>(n - n_pos)) > 1e-9) o.fail("incorrect-class weight sum");

    std::vector<double> rewards;
    for (const auto& m : b.members) rewards.push_back(m.reward);
    if (oracle::variance(rewards) > 0.0) {
      ++nondegenerate;
      const auto adv = edis::grpo_advantage(rewards);
      if (std::fabs(oracle::mean(adv)) > 1e-12) o.fail("advantage mean");
      if (std::fabs(std::sqrt(oracle::variance(adv)) - 1.0) > 1e-9) o.fail("advantage SD");
    }
  }
  if (nondegenerate != 500) o.fail("only " + std::to_string(nondegenerate) + " non-degenerate groups");
  return o;
}

edis::CandidatePool make_pool(const std::vector<int>& answers, const std::vector<double>& scores,
                              edis::ScoreKind kind) {
  edis::CandidatePool pool{"q", {}};
  for (std::size_t i = 0; i < answers.size(); ++i) {
    edis::ResponseRecord r{"q", std::to_string(i), edis::EntropyTrajectory::from_entropies({0.0})};
    r.answer = std::string(1, static_cast<char>('A' + answers[i]));
    edis::ScoredResponse s{std::move(r), {}};
    s.scores[kind] = {kind, scores[i], edis::direction_of(kind)};
    pool.candidates.push_back(std::move(s));
  }
  return pool;
}

Outcome selection_oracles() {
  Outcome o;
  const std::vector<double> grid{0.0, 0.5, 1.0, 3.0};
  const edis::ScoreKind kinds[] = {edis::ScoreKind::edis, edis::ScoreKind::self_certainty};
  std::size_t pools = 0;
  for (std::size_t n = 1; n <= 5; ++n) {
    std::size_t combos = 1;
    for (std::size_t i = 0; i < n; ++i) combos *= 3 * grid.size();
    for (std::size_t code = 0; code < combos; ++code) {
      std::vector<int> answers(n);
      std::vector<double> scores(n);
      std::size_t c = code;
      for (std::size_t i = 0; i < n; ++i) {
        answers[i] = static_cast<int>(c % 3);
        c /= 3;
        scores[i] = grid[c % grid.size()];
        c /= grid.size();
      }
      for (auto kind : kinds) {
        const auto pool = make_pool(answers, scores, kind);
        std::vector<double> weights(n);
        for (std::size_t i = 0; i < n; ++i) {
          weights[i] = kind == edis::ScoreKind::edis ? 1.0 / (scores[i] + 0.1) : std::max(scores[i], 0.0);
        }
        const std::string want(1, static_cast<char>('A' + oracle::weighted_plurality(answers, weights)));
        if (edis::weighted_borda_vote(pool, kind, 0.1) != want) o.fail("weighted vote, pool " + std::to_string(code));
        const std::string maj(1, static_cast<char>('A' + oracle::plurality(answers)));
        if (edis::majority_vote(pool) != maj) o.fail("majority vote, pool " + std::to_string(code));
        ++pools;
      }
    }
  }

  const auto fixture = make_pool({0, 0, 1}, {1.0, 3.0, 0.5}, edis::ScoreKind::edis);
  const auto tallies = edis::weighted_tally(fixture, edis::ScoreKind::edis, 0.1);
  const auto round6 = [](double v) { return std::round(v * 1e6) / 1e6; };
  if (tallies.size() != 2 || round6(tallies[0].total) != 1.231672 || round6(tallies[1].total) != 1.666667) {
    o.fail("fixture totals");
  }
  if (edis::weighted_borda_vote(fixture, edis::ScoreKind::edis, 0.1) != "B") o.fail("fixture winner");
  o.detail = o.ok ? std::to_string(pools) + " pools; fixture A=" + fmt(tallies[0].total) +
                        " B=" + fmt(tallies[1].total) + " winner B"
                  : o.detail;
  return o;
}

Outcome auc_oracle() {
  Outcome o;
  edis::Rng rng(1004);
  for (int iter = 0; iter < 200; ++iter) {
    auto set = gen::labeled(rng, 200);
    std::vector<double> scores;
    std::vector<bool> labels;
    for (const auto& it : set.items) {
      scores.push_back(it.score);
      labels.push_back(it.correct);
    }
    const double auc = edis::roc_auc(set);
    const double want = oracle::auc(scores, labels, set.direction == edis::Direction::lower_is_confident);
    if (auc != want) o.fail("set " + std::to_string(iter) + ": " + fmt(auc) + " vs " + fmt(want));
    set.direction = set.direction == edis::Direction::lower_is_confident ? edis::Direction::higher_is_confident
                                                                         : edis::Direction::lower_is_confident;
    if (std::fabs(edis::roc_auc(set) - (1.0 - auc)) > 1e-12) o.fail("direction flip");
  }
  return o;
}

// gen -> score -> eval through the command-line entry point.
json edis_eval_metric(const std::string& tag, const std::string& noise, std::string& spikes_out) {
  const auto trace = (workdir() / (tag + "-trace.jsonl")).string();
  const auto scores = (workdir() / (tag + "-scores.jsonl")).string();
  const auto report = (workdir() / (tag + "-eval.jsonl")).string();
  auto r = cli({"gen", "--mix", "stable:200,rebound:200", "--noise", noise, "--seed", "2024", "--out", trace});
  if (r.code != 0) throw std::runtime_error("gen failed: " + r.err);
  r = cli({"score", "--in", trace, "--out", scores});
  if (r.code != 0) throw std::runtime_error("score failed: " + r.err);
  r = cli({"eval", "--in", scores, "--out", report});
  if (r.code != 0) throw std::runtime_error("eval failed: " + r.err);
  const auto text = slurp(report);
  for (const auto& s : rows_of(text, "spikes")) {
    if (s["detector"] == "burst_rebound") spikes_out = s.dump();
  }
  for (const auto& m : rows_of(text, "metric")) {
    if (m["metric"] == "edis") return m;
  }
  throw std::runtime_error("no edis metric row");
}

Outcome synthetic_separation() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();

  std::string spikes_clean;
  const auto clean = edis_eval_metric("clean", "0", spikes_clean);
  const double auc_clean = clean["auc"].get<double>();
  if (auc_clean != 1.0) o.fail("noise-free AUC " + fmt(auc_clean));

  const auto s = json::parse(spikes_clean);
  const double mc = s["mean_correct"].get<double>();
  const double mi = s["mean_incorrect"].get<double>();
  // With zero spikes on the correct side the ratio is unbounded; the
  // criterion ratio >= 2 is checked in its multiplied-out form.
  if (!(mi >= 2.0 * mc) || !(mi > 0.0)) o.fail("spike means correct " + fmt(mc) + " incorrect " + fmt(mi));
  const std::string ratio = s["ratio"].is_null() ? "unbounded" : fmt(s["ratio"].get<double>());

  std::string spikes_noisy;
  const auto noisy = edis_eval_metric("noisy", "0.2", spikes_noisy);
  const double auc_noisy = noisy["auc"].get<double>();
  if (auc_noisy < 0.95) o.fail("noise 0.2 AUC " + fmt(auc_noisy));
  const auto sn = json::parse(spikes_noisy);
  const std::string ratio_noisy = sn["ratio"].is_null() ? "unbounded" : fmt(sn["ratio"].get<double>());

  const double secs = elapsed_since(t0);
  if (secs >= 10.0) o.fail("took " + fmt(secs) + "s, limit 10s");
  if (o.ok) {
    o.detail = "AUC " + fmt(auc_clean) + " (spike means " + fmt(mc) + " vs " + fmt(mi) + ", ratio " + ratio +
               "); noise 0.2 AUC " + fmt(auc_noisy) + " (ratio " + ratio_noisy + ")";
  }
  return o;
}

Outcome best_of_n_monotone() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto trace = (workdir() / "bon-trace.jsonl").string();
  // 40 prompts x 128 candidates; a quarter stable, the rest unstable.
  auto r = cli({"gen", "--mix", "stable:1280,rebound:1280,burst:1280,mixed:1280", "--prompts", "40", "--noise",
                "0.15", "--max-events", "2", "--seed", "7", "--out", trace});
  if (r.code != 0) throw std::runtime_error("gen failed: " + r.err);
  r = cli({"select", "--in", trace, "--k", "8", "--m", "1,2,4,8,16", "--metric", "edis"});
  if (r.code != 0) throw std::runtime_error("select failed: " + r.err);
  std::vector<double> acc;
  for (const auto& s : rows_of(r.out, "summary")) acc.push_back(s["avg_accuracy"].get<double>());
  if (acc.size() != 5) o.fail("expected 5 summaries");
  std::string series;
  for (std::size_t i = 0; i < acc.size(); ++i) {
    series += (i ? ", " : "") + fmt(acc[i]);
    if (i > 0 && acc[i] < acc[i - 1]) o.fail("accuracy dropped at step " + std::to_string(i));
  }
  const double secs = elapsed_since(t0);
  if (secs >= 30.0) o.fail("took " + fmt(secs) + "s, limit 30s");
  if (o.ok) o.detail = "avg accuracy over m=1,2,4,8,16: " + series;
  else o.detail += " [" + series + "]";
  return o;
}

Outcome report_values() {
  Outcome o;
  const double d = edis::discrimination_ratio(110.8, 7.9);
  if (std::fabs(d - 14.0) > 0.05) o.fail("discrimination ratio " + fmt(d));
  const double s = edis::spike_ratio(std::vector<double>{49.3}, std::vector<double>{82.0});
  if (std::fabs(s - 1.66) > 0.01) o.fail("spike ratio " + fmt(s));
  if (o.ok) o.detail = "discrimination " + fmt(d) + ", spike ratio " + fmt(s);
  return o;
}

Outcome round_trip_determinism() {
  Outcome o;
  const auto trace = workdir() / "rt-trace.jsonl";
  const std::vector<std::string> gen_args{"gen",     "--mix",       "stable:40,burst:30,rebound:30,mixed:20",
                                          "--noise", "0.25",        "--prompts",
                                          "6",       "--with-text", "--seed",
                                          "99",      "--out",       trace.string()};
  if (cli(gen_args).code != 0) throw std::runtime_error("gen failed");
  const auto first_trace = slurp(trace);

  // The same records built directly through the library.
  edis::SyntheticOptions opts;
  opts.prompts = 6;
  opts.with_text = true;
  std::vector<edis::ProfileCount> parts;
  const std::pair<edis::ProfileKind, std::size_t> mix[] = {{edis::ProfileKind::stable, 40},
                                                           {edis::ProfileKind::burst, 30},
                                                           {edis::ProfileKind::rebound, 30},
                                                           {edis::ProfileKind::mixed, 20}};
  for (std::size_t i = 0; i < 4; ++i) {
    parts.push_back({{.kind = mix[i].first, .noise_scale = 0.25, .seed = 99 + i}, mix[i].second});
  }
  const auto expected = edis::generate_mixture(parts, opts, 99 ^ 0x9E3779B97F4A7C15ULL);
  const auto parsed = edis::parse_trace(trace).records;
  if (parsed != expected) o.fail("parsed records differ from generated records");

  auto score_and_eval = [&] {
    const auto s = cli({"score", "--in", trace.string()});
    const auto scores = workdir() / "rt-scores.jsonl";
    std::ofstream(scores, std::ios::binary) << s.out;
    const auto e = cli({"eval", "--in", scores.string()});
    return std::make_pair(s.out, e.out);
  };
  const auto a = score_and_eval();
  if (cli(gen_args).code != 0) throw std::runtime_error("gen failed");
  if (slurp(trace) != first_trace) o.fail("regenerated trace differs");
  const auto b = score_and_eval();
  if (a.first != b.first) o.fail("score reports differ");
  if (a.second != b.second) o.fail("eval reports differ");
  if (a.first.empty() || a.second.empty()) o.fail("empty report");
  if (o.ok) o.detail = std::to_string(parsed.size()) + " records, byte-identical score and eval reports";
  return o;
}

}  // namespace

int main() {
  report("spike detectors and EDIS match literal oracles on 1000 trajectories", spike_oracles);
  report("sequence weighting matches scripted oracle on 500 batches", curation_oracle);
  report("weighted and majority votes match exhaustive enumeration", selection_oracles);
  report("AUC matches brute-force pair counting on 200 sets", auc_oracle);
  report("synthetic stable vs rebound separation through gen/score/eval", synthetic_separation);
  report("best-of-N accuracy non-decreasing in m (k=8)", best_of_n_monotone);
  report("reported ratio fixtures", report_values);
  report("gen/parse round-trip and report determinism", round_trip_determinism);
  std::printf("%d failure(s)\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
