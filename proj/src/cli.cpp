#include "edis/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <vector>

#include "CLI11.hpp"
#include "edis/confidence.hpp"
#include "edis/curation.hpp"
#include "edis/evalstats.hpp"
#include "edis/heatmap.hpp"
#include "edis/log.hpp"
#include "edis/run_config.hpp"
#include "edis/selection.hpp"
#include "edis/synthetic.hpp"
#include "edis/trace_io.hpp"
#include "edis/version.hpp"

namespace edis::cli {

using nlohmann::json;

ExitCode exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::usage:
    case ErrorCode::invalid_config:
    case ErrorCode::invalid_profile: return kUsage;
    case ErrorCode::io: return kInput;
    case ErrorCode::parse:
    case ErrorCode::invalid_distribution:
    case ErrorCode::invalid_trajectory:
    case ErrorCode::empty_trajectory:
    case ErrorCode::missing_text: return kData;
    case ErrorCode::insufficient_data:
    case ErrorCode::size:
    case ErrorCode::missing_score:
    case ErrorCode::missing_answer:
    case ErrorCode::insufficient_labels:
    case ErrorCode::degenerate_labels:
    case ErrorCode::undefined_correlation:
    case ErrorCode::undefined_effect:
    case ErrorCode::undefined_ratio:
    case ErrorCode::domain:
    case ErrorCode::shape: return kAnalysis;
  }
  return kInternal;
}

json score_record(const ResponseRecord& record, const SpikeConfig& cfg) {
  const auto& traj = record.trajectory;
  const auto report = spike_report(traj, cfg);
  json j;
  j["record"] = "score";
  j["prompt_id"] = record.prompt_id;
  j["response_id"] = record.response_id;
  j["answer"] = record.answer ? json(*record.answer) : json(nullptr);
  j["correct"] = record.correct ? json(*record.correct) : json(nullptr);
  j["length"] = traj.size();
  j["edis"] = edis(traj, cfg);
  j["mean_entropy"] = mean_entropy(traj);
  j["entropy_variance"] = entropy_variance(traj);
  const auto sc = try_self_certainty(record);
  j["self_certainty"] = sc ? json(sc->value) : json(nullptr);
  j["burst"] = report.burst_count;
  j["rebound"] = report.rebound_count;
  j["combined"] = report.combined_score;
  j["diff_spikes"] = simple_diff_spike_count(traj, cfg);
  return j;
}

namespace {

[[noreturn]] void usage_error(const std::string& msg) { throw Error(ErrorCode::usage, msg); }

// ---------------------------------------------------------------- flags

struct Flags {
  std::string config;
  std::string in;
  std::string out;
  std::string checkpoint_series;
  std::size_t window = 0;
  double tau_burst = 0;
  double tau_rebound = 0;
  double tau_diff = 0;
  std::uint64_t seed = 0;
  std::size_t k = 0;
  std::vector<std::size_t> m_list;
  double m_real = 0;
  std::string metric;
  double epsilon = 0;
  double alpha = 0;
  std::size_t target_n = 0;
  std::string z_scope;
  std::vector<double> retention;
  std::string tail_mode;

  // gen
  std::string profile;
  std::size_t count = 0;
  std::string mix;
  std::size_t prompts = 1;
  double noise = 0.0;
  double base_entropy = 0.3;
  std::size_t min_length = 48;
  std::size_t max_length = 96;
  std::size_t min_events = 1;
  std::size_t max_events = 1;
  std::uint64_t vocab_size = 32000;
  bool with_text = false;

  // heatmap
  std::string response_id;
};

struct Registered {
  std::map<std::string, CLI::Option*> opts;
  bool given(const std::string& name) const {
    auto it = opts.find(name);
    return it != opts.end() && it->second->count() > 0;
  }
};

void add_common(CLI::App* sub, Flags& f, Registered& r, bool needs_in) {
  auto* in = sub->add_option("--in", f.in, "input file ('-' for stdin)");
  if (needs_in) in->required();
  r.opts["in"] = in;
  r.opts["out"] = sub->add_option("--out", f.out, "output file ('-' for stdout, the default)");
  r.opts["config"] = sub->add_option("--config", f.config, "JSON config file");
  r.opts["window"] = sub->add_option("--window", f.window, "burst window w (default 5)");
  r.opts["tau-burst"] = sub->add_option("--tau-burst", f.tau_burst, "burst threshold, nats (default 1.36)");
  r.opts["tau-rebound"] =
      sub->add_option("--tau-rebound", f.tau_rebound, "rebound threshold, nats (default 1.33)");
  r.opts["tau-diff"] =
      sub->add_option("--tau-diff", f.tau_diff, "simple-diff threshold, nats (default 0.7)");
  r.opts["seed"] = sub->add_option("--seed", f.seed, "random seed (default 0)");
  r.opts["lenient"] = sub->add_flag("--lenient", "skip malformed input lines");
  r.opts["tail-mode"] = sub->add_option("--tail-mode", f.tail_mode,
                                        "entropy from truncated top_probs: single_bucket|renormalize")
                            ->check(CLI::IsMember({"single_bucket", "renormalize"}));
}

CLI::Option* add_metric(CLI::App* sub, Flags& f) {
  return sub->add_option("--metric", f.metric, "confidence metric: edis|entropy|sc (default edis)")
      ->check(CLI::IsMember({"edis", "entropy", "mean_entropy", "sc", "self_certainty"}));
}

RunConfig resolve(const Flags& f, const Registered& r) {
  RunConfig cfg;
  if (r.given("config")) cfg = load_config_file(f.config);
  if (r.given("in")) cfg.in = f.in;
  if (r.given("out")) cfg.out = f.out;
  if (r.given("checkpoint-series")) cfg.checkpoint_series = f.checkpoint_series;
  if (r.given("window")) cfg.spike.window = f.window;
  if (r.given("tau-burst")) cfg.spike.tau_burst = f.tau_burst;
  if (r.given("tau-rebound")) cfg.spike.tau_rebound = f.tau_rebound;
  if (r.given("tau-diff")) cfg.spike.tau_diff = f.tau_diff;
  if (r.given("seed")) cfg.seed = f.seed;
  if (r.given("lenient")) cfg.lenient = true;
  if (r.given("tail-mode")) {
    cfg.tail_mode = f.tail_mode == "renormalize" ? TailMode::renormalize : TailMode::single_bucket;
  }
  if (r.given("k")) cfg.k = f.k;
  if (r.given("m-list")) cfg.m = f.m_list;
  if (r.given("m-real")) cfg.oversample = f.m_real;
  if (r.given("metric")) cfg.metric = *parse_score_kind(f.metric);
  if (r.given("epsilon")) cfg.epsilon = f.epsilon;
  if (r.given("alpha")) cfg.alpha = f.alpha;
  if (r.given("target-n")) cfg.target_n = f.target_n;
  if (r.given("z-scope")) cfg.z_scope = f.z_scope == "batch" ? ZScope::batch : ZScope::group;
  if (r.given("retention")) cfg.retention = f.retention;
  if (cfg.target_n && cfg.oversample) {
    usage_error("--target-n and --m are mutually exclusive for curate");
  }
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------- io

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
      return;
    }
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw Error(ErrorCode::io, "cannot write " + path);
    stream_ = file_.get();
  }
  void line(const json& j) { *stream_ << j.dump() << '\n'; }
  void finish() {
    stream_->flush();
    if (!*stream_) throw Error(ErrorCode::io, "write failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

json header(const std::string& command, const RunConfig& cfg) {
  return json{{"record", "header"},
              {"tool", "edis"},
              {"version", kVersion},
              {"command", command},
              {"config", to_json(cfg)}};
}

ParseResult read_traces(const RunConfig& cfg) {
  ParseOptions opts{.lenient = cfg.lenient, .tail_mode = cfg.tail_mode};
  if (cfg.in == "-") return parse_trace(std::cin, opts, "<stdin>");
  if (cfg.in.empty()) usage_error("--in is required");
  return parse_trace(std::filesystem::path(cfg.in), opts);
}

json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
json nullable(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }
json nullable(const std::optional<bool>& v) { return v ? json(*v) : json(nullptr); }
json nullable(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

struct MeanAccumulator {
  double sum = 0.0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    ++n;
  }
  json value() const { return n ? json(sum / static_cast<double>(n)) : json(nullptr); }
};

bool all_labelled(std::span<const ScoredResponse> cs) {
  return std::all_of(cs.begin(), cs.end(),
                     [](const ScoredResponse& c) { return c.response.correct.has_value(); });
}

// ---------------------------------------------------------------- score

void cmd_score(const RunConfig& cfg, std::ostream& out) {
  const auto parsed = read_traces(cfg);
  Output o(cfg.out, out);
  o.line(header("score", cfg));
  for (const auto& rec : parsed.records) o.line(score_record(rec, cfg.spike));
  o.finish();
}

// ---------------------------------------------------------------- select

void cmd_select(const RunConfig& cfg, std::ostream& out) {
  const auto parsed = read_traces(cfg);
  const auto groups = group_by_prompt(parsed.records);
  std::vector<std::size_t> multipliers = cfg.m;
  if (multipliers.empty()) multipliers.push_back(0);  // whole pool

  Output o(cfg.out, out);
  o.line(header("select", cfg));
  for (std::size_t mult : multipliers) {
    MeanAccumulator avg;
    MeanAccumulator best;
    MeanAccumulator maj;
    for (const auto& g : groups) {
      const std::size_t pool_size = mult ? mult * cfg.k : g.records.size();
      if (g.records.size() < pool_size) {
        throw Error(ErrorCode::size, "prompt " + g.prompt_id + " has " +
                                         std::to_string(g.records.size()) +
                                         " candidates, m*k needs " + std::to_string(pool_size));
      }
      CandidatePool pool{g.prompt_id, {}};
      for (std::size_t i = 0; i < pool_size; ++i) {
        pool.candidates.push_back(score_response(g.records[i], cfg.spike));
      }
      const auto kept = best_k_filter(pool, cfg.k, cfg.metric);

      json row{{"record", "selection"}, {"prompt_id", g.prompt_id},
               {"m", mult ? json(mult) : json(nullptr)}, {"k", cfg.k},
               {"n_candidates", pool_size}};
      json ids = json::array();
      json scores = json::array();
      for (const auto& c : kept.candidates) {
        ids.push_back(c.response.response_id);
        scores.push_back(c.score(cfg.metric).value);
      }
      row["kept_ids"] = std::move(ids);
      row["kept_scores"] = std::move(scores);

      if (all_labelled(kept.candidates)) {
        const auto rep = pool_metrics(kept, cfg.metric);
        row["avg_accuracy"] = nullable(rep.avg_accuracy);
        row["best_scored_accuracy"] = nullable(rep.best_scored_accuracy);
        row["majority_accuracy"] = nullable(rep.majority_accuracy);
        row["winning_answer"] = nullable(rep.winning_answer);
        avg.add(*rep.avg_accuracy);
        best.add(*rep.best_scored_accuracy);
        maj.add(*rep.majority_accuracy);
      } else {
        row["avg_accuracy"] = nullptr;
        row["best_scored_accuracy"] = nullptr;
        row["majority_accuracy"] = nullptr;
        row["winning_answer"] = nullptr;
      }
      o.line(row);
    }
    o.line(json{{"record", "summary"},
                {"command", "select"},
                {"m", mult ? json(mult) : json(nullptr)},
                {"k", cfg.k},
                {"metric", std::string(to_string(cfg.metric))},
                {"prompts", groups.size()},
                {"labelled_prompts", avg.n},
                {"avg_accuracy", avg.value()},
                {"best_scored_accuracy", best.value()},
                {"majority_accuracy", maj.value()}});
  }
  o.finish();
}

// ---------------------------------------------------------------- vote

void cmd_vote(const RunConfig& cfg, std::ostream& out) {
  const auto parsed = read_traces(cfg);
  const auto groups = group_by_prompt(parsed.records);
  constexpr ScoreKind kKinds[] = {ScoreKind::edis, ScoreKind::mean_entropy,
                                  ScoreKind::self_certainty};

  Output o(cfg.out, out);
  o.line(header("vote", cfg));
  MeanAccumulator majority_acc;
  std::map<ScoreKind, MeanAccumulator> borda_acc;

  for (const auto& g : groups) {
    CandidatePool all{g.prompt_id, {}};
    for (const auto& r : g.records) all.candidates.push_back(score_response(r, cfg.spike));
    const auto pool = drop_unanswered(all);

    json row{{"record", "vote"},
             {"prompt_id", g.prompt_id},
             {"n_candidates", all.size()},
             {"n_dropped_no_answer", all.size() - pool.size()}};
    if (pool.candidates.empty()) {
      row["majority"] = nullptr;
      row["borda"] = nullptr;
      o.line(row);
      continue;
    }
    const bool labelled = all_labelled(pool.candidates);

    const auto maj = majority_vote(pool);
    row["majority"] = json{{"answer", maj}, {"correct", nullable(answer_correctness(pool, maj))}};
    if (labelled) majority_acc.add(answer_correctness(pool, maj).value_or(false) ? 1.0 : 0.0);

    json borda = json::object();
    for (ScoreKind kind : kKinds) {
      const bool available = std::all_of(pool.candidates.begin(), pool.candidates.end(),
                                         [&](const ScoredResponse& c) { return c.has_score(kind); });
      const std::string name(to_string(kind));
      if (!available) {
        borda[name] = nullptr;
        continue;
      }
      const auto tallies = weighted_tally(pool, kind, cfg.epsilon);
      const auto winner = weighted_borda_vote(pool, kind, cfg.epsilon);
      json totals = json::object();
      for (const auto& t : tallies) totals[t.answer] = t.total;
      borda[name] = json{{"answer", winner},
                         {"correct", nullable(answer_correctness(pool, winner))},
                         {"totals", std::move(totals)}};
      if (labelled) borda_acc[kind].add(answer_correctness(pool, winner).value_or(false) ? 1.0 : 0.0);
    }
    row["borda"] = std::move(borda);
    o.line(row);
  }

  json summary{{"record", "summary"},
               {"command", "vote"},
               {"prompts", groups.size()},
               {"epsilon", cfg.epsilon},
               {"majority_accuracy", majority_acc.value()}};
  json borda = json::object();
  for (ScoreKind kind : kKinds) borda[std::string(to_string(kind))] = borda_acc[kind].value();
  summary["borda_accuracy"] = std::move(borda);
  o.line(summary);
  o.finish();
}

// ---------------------------------------------------------------- curate

void cmd_curate(const RunConfig& cfg, std::ostream& out) {
  const auto parsed = read_traces(cfg);
  const auto groups = group_by_prompt(parsed.records);

  struct Prepared {
    GroupBatch full;
    std::vector<std::size_t> kept;  // indices into full.members
    GroupBatch kept_batch;
  };
  std::vector<Prepared> prepared;
  for (const auto& g : groups) {
    Prepared p;
    p.full.prompt_id = g.prompt_id;
    for (const auto& r : g.records) {
      if (!r.correct) {
        throw Error(ErrorCode::insufficient_labels,
                    "curate needs correctness labels; " + r.response_id + " has none");
      }
      p.full.members.push_back(GroupMember{r.response_id, edis(r.trajectory, cfg.spike),
                                           *r.correct, r.reward.value_or(*r.correct ? 1.0 : 0.0)});
    }
    const std::size_t n = p.full.members.size();
    std::optional<std::size_t> target = cfg.target_n;
    if (cfg.oversample) {
      target = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::lround(static_cast<double>(n) / *cfg.oversample)));
    }
    if (target) {
      p.full.target_n = *target;
      p.kept = sequence_filter_indices(p.full);
      std::sort(p.kept.begin(), p.kept.end());
    } else {
      p.full.target_n = n;
      for (std::size_t i = 0; i < n; ++i) p.kept.push_back(i);
    }
    p.kept_batch.prompt_id = g.prompt_id;
    p.kept_batch.target_n = p.kept.size();
    for (std::size_t i : p.kept) p.kept_batch.members.push_back(p.full.members[i]);
    prepared.push_back(std::move(p));
  }

  std::optional<LogEdisStats> pooled;
  if (cfg.z_scope == ZScope::batch && !prepared.empty()) {
    std::vector<GroupBatch> batches;
    for (const auto& p : prepared) batches.push_back(p.kept_batch);
    pooled = log_edis_stats(batches);
  }

  Output o(cfg.out, out);
  o.line(header("curate", cfg));
  std::size_t mixed = 0;
  std::size_t kept_total = 0;
  std::size_t member_total = 0;
  for (const auto& p : prepared) {
    const auto weights = pooled ? sequence_weights(p.kept_batch, cfg.alpha, *pooled)
                                : sequence_weights(p.kept_batch, cfg.alpha);
    if (weights.mixed) ++mixed;
    kept_total += p.kept.size();
    member_total += p.full.members.size();
    std::vector<std::optional<std::size_t>> slot(p.full.members.size());
    for (std::size_t j = 0; j < p.kept.size(); ++j) slot[p.kept[j]] = j;

    for (std::size_t i = 0; i < p.full.members.size(); ++i) {
      const auto& m = p.full.members[i];
      json row{{"record", "curation"}, {"prompt_id", p.full.prompt_id},
               {"response_id", m.response_id}, {"edis", m.edis},
               {"correct", m.correct}, {"reward", m.reward},
               {"kept", slot[i].has_value()}, {"mixed", weights.mixed}};
      for (const char* key : {"z", "signed_s", "raw_w", "norm_w", "advantage", "weighted_advantage"}) {
        row[key] = nullptr;
      }
      if (slot[i]) {
        const auto& w = weights.members[*slot[i]];
        row["z"] = w.z;
        row["signed_s"] = w.signed_s;
        row["raw_w"] = w.raw_w;
        row["norm_w"] = w.norm_w;
        row["advantage"] = w.advantage;
        row["weighted_advantage"] = w.weighted_advantage;
      }
      o.line(row);
    }
  }
  o.line(json{{"record", "summary"},
              {"command", "curate"},
              {"prompts", prepared.size()},
              {"mixed_prompts", mixed},
              {"members", member_total},
              {"kept", kept_total},
              {"alpha", cfg.alpha}});
  o.finish();
}

// ---------------------------------------------------------------- eval

struct EvalItem {
  std::optional<std::string> answer;
  std::optional<bool> correct;
  double edis = 0.0;
  double mean_entropy = 0.0;
  std::optional<double> self_certainty;
  double edis_spikes = 0.0;  // burst + rebound
  double diff_spikes = 0.0;
};

EvalItem item_from_score(const json& j) {
  EvalItem it;
  auto opt_string = [&](const char* k) -> std::optional<std::string> {
    auto f = j.find(k);
    if (f == j.end() || f->is_null()) return std::nullopt;
    return f->get<std::string>();
  };
  it.answer = opt_string("answer");
  if (auto f = j.find("correct"); f != j.end() && !f->is_null()) it.correct = f->get<bool>();
  it.edis = j.at("edis").get<double>();
  it.mean_entropy = j.at("mean_entropy").get<double>();
  if (auto f = j.find("self_certainty"); f != j.end() && !f->is_null()) {
    it.self_certainty = f->get<double>();
  }
  it.edis_spikes = j.at("burst").get<double>() + j.at("rebound").get<double>();
  it.diff_spikes = j.at("diff_spikes").get<double>();
  return it;
}

std::vector<EvalItem> read_eval_items(const RunConfig& cfg) {
  std::ifstream file;
  std::istream* in = &std::cin;
  if (cfg.in != "-") {
    file.open(cfg.in);
    if (!file) throw Error(ErrorCode::io, "cannot read " + cfg.in);
    in = &file;
  }
  ParseOptions opts{.lenient = cfg.lenient, .tail_mode = cfg.tail_mode};
  std::vector<EvalItem> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(*in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw Error(ErrorCode::parse, std::string("malformed JSON: ") + e.what());
      }
      if (is_metadata_record(j)) continue;
      if (j.value("record", "") == "score") {
        items.push_back(item_from_score(j));
      } else {
        items.push_back(item_from_score(score_record(record_from_json(j, opts), cfg.spike)));
      }
    } catch (const std::exception& e) {
      const std::string where = cfg.in + ":" + std::to_string(line_no) + ": ";
      const auto* err = dynamic_cast<const Error*>(&e);
      const ErrorCode code = err ? err->code() : ErrorCode::parse;
      if (!cfg.lenient) throw Error(code, where + e.what());
      log::warn("skipping " + where + e.what());
    }
  }
  return items;
}

template <typename Fn>
json guarded(Fn fn) {
  try {
    return json(fn());
  } catch (const Error& e) {
    return nullptr;
  }
}

std::vector<CheckpointPoint> read_checkpoints(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot read checkpoint series " + path);
  std::vector<CheckpointPoint> series;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      if (is_metadata_record(j)) continue;
      series.push_back({j.at("step").get<std::int64_t>(), j.at("mean_spikes_correct").get<double>(),
                        j.at("mean_spikes_incorrect").get<double>()});
    } catch (const json::exception& e) {
      throw Error(ErrorCode::parse, path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return series;
}

void cmd_eval(const RunConfig& cfg, std::ostream& out) {
  if (cfg.in.empty() && cfg.checkpoint_series.empty()) {
    usage_error("eval needs --in and/or --checkpoint-series");
  }
  Output o(cfg.out, out);
  o.line(header("eval", cfg));

  if (!cfg.in.empty()) {
    const auto all = read_eval_items(cfg);
    std::vector<EvalItem> items;
    std::size_t no_answer = 0;
    std::size_t unlabelled = 0;
    for (const auto& it : all) {
      if (!it.answer) {
        ++no_answer;
      } else if (!it.correct) {
        ++unlabelled;
      } else {
        items.push_back(it);
      }
    }
    std::size_t n_correct = 0;
    for (const auto& it : items) n_correct += *it.correct ? 1 : 0;
    o.line(json{{"record", "dataset"},
                {"items", all.size()},
                {"evaluated", items.size()},
                {"excluded_no_answer", no_answer},
                {"excluded_unlabelled", unlabelled},
                {"correct", n_correct},
                {"accuracy", items.empty() ? json(nullptr)
                                           : json(static_cast<double>(n_correct) /
                                                  static_cast<double>(items.size()))}});

    std::vector<double> labels;
    for (const auto& it : items) labels.push_back(*it.correct ? 1.0 : 0.0);

    struct MetricColumn {
      ScoreKind kind;
      std::vector<double> values;
    };
    std::vector<MetricColumn> columns;
    {
      MetricColumn e{ScoreKind::edis, {}};
      MetricColumn h{ScoreKind::mean_entropy, {}};
      for (const auto& it : items) {
        e.values.push_back(it.edis);
        h.values.push_back(it.mean_entropy);
      }
      columns.push_back(std::move(e));
      columns.push_back(std::move(h));
      const bool have_sc = !items.empty() && std::all_of(items.begin(), items.end(), [](const auto& it) {
        return it.self_certainty.has_value();
      });
      if (have_sc) {
        MetricColumn s{ScoreKind::self_certainty, {}};
        for (const auto& it : items) s.values.push_back(*it.self_certainty);
        columns.push_back(std::move(s));
      }
    }

    for (const auto& col : columns) {
      LabeledScoreSet set{{}, direction_of(col.kind)};
      for (std::size_t i = 0; i < items.size(); ++i) {
        set.items.push_back({col.values[i], *items[i].correct});
      }
      json row{{"record", "metric"},
               {"metric", std::string(to_string(col.kind))},
               {"direction", std::string(to_string(direction_of(col.kind)))}};
      row["auc"] = guarded([&] { return roc_auc(set); });
      row["pearson_correctness"] = guarded([&] { return pearson(col.values, labels); });
      row["spearman_correctness"] = guarded([&] { return spearman(col.values, labels); });
      json retention = json::array();
      if (!set.items.empty()) {
        for (const auto& p : retention_accuracy(set, cfg.retention)) {
          retention.push_back(
              json{{"fraction", p.fraction}, {"kept", p.kept}, {"accuracy", p.accuracy}});
        }
      }
      row["retention"] = std::move(retention);
      o.line(row);
    }

    o.line(json{{"record", "correlation"},
                {"x", "edis"},
                {"y", "mean_entropy"},
                {"pearson", guarded([&] { return pearson(columns[0].values, columns[1].values); })},
                {"spearman",
                 guarded([&] { return spearman(columns[0].values, columns[1].values); })}});

    auto spike_row = [&](const char* detector, double EvalItem::*field) {
      std::vector<double> correct;
      std::vector<double> incorrect;
      for (const auto& it : items) (*it.correct ? correct : incorrect).push_back(it.*field);
      auto mean = [](const std::vector<double>& v) {
        if (v.empty()) return json(nullptr);
        double s = 0.0;
        for (double x : v) s += x;
        return json(s / static_cast<double>(v.size()));
      };
      o.line(json{{"record", "spikes"},
                  {"detector", detector},
                  {"mean_correct", mean(correct)},
                  {"mean_incorrect", mean(incorrect)},
                  {"ratio", guarded([&] { return spike_ratio(correct, incorrect); })},
                  {"cohens_d", guarded([&] { return cohens_d(correct, incorrect); })},
                  {"welch_t", guarded([&] { return welch_t(correct, incorrect); })}});
    };
    spike_row("diff", &EvalItem::diff_spikes);
    spike_row("burst_rebound", &EvalItem::edis_spikes);
  }

  if (!cfg.checkpoint_series.empty()) {
    const auto series = read_checkpoints(cfg.checkpoint_series);
    const auto summary = spike_ratio_series(series);
    for (const auto& r : summary.ratios) {
      o.line(json{{"record", "checkpoint"}, {"step", r.step}, {"ratio", r.ratio}});
    }
    o.line(json{{"record", "checkpoint_summary"},
                {"checkpoints", summary.ratios.size()},
                {"mean", summary.mean},
                {"sd", summary.sd},
                {"min", summary.min},
                {"max", summary.max}});
  }
  o.finish();
}

// ---------------------------------------------------------------- heatmap

std::string safe_name(const std::string& s) {
  std::string out;
  for (char c : s) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    out.push_back(ok ? c : '_');
  }
  return out;
}

void cmd_heatmap(const RunConfig& cfg, const std::string& response_id, std::ostream& out) {
  const auto parsed = read_traces(cfg);
  if (cfg.out.empty() || cfg.out == "-") usage_error("heatmap needs --out DIR");
  const std::filesystem::path dir(cfg.out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());

  std::size_t written = 0;
  for (const auto& rec : parsed.records) {
    if (!response_id.empty() && rec.response_id != response_id) continue;
    const auto path = dir / (safe_name(rec.prompt_id) + "__" + safe_name(rec.response_id) + ".html");
    export_heatmap(rec, cfg.spike, path);
    out << json{{"record", "heatmap"},
                {"prompt_id", rec.prompt_id},
                {"response_id", rec.response_id},
                {"path", path.string()}}
               .dump()
        << '\n';
    ++written;
  }
  if (!response_id.empty() && written == 0) {
    throw Error(ErrorCode::size, "no record with response_id " + response_id);
  }
}

// ---------------------------------------------------------------- gen

std::vector<std::pair<ProfileKind, std::size_t>> parse_mix(const std::string& mix) {
  std::vector<std::pair<ProfileKind, std::size_t>> out;
  std::stringstream ss(mix);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto colon = part.find(':');
    if (colon == std::string::npos) usage_error("--mix entries look like kind:count, got " + part);
    const auto kind = parse_profile_kind(part.substr(0, colon));
    if (!kind) usage_error("unknown profile '" + part.substr(0, colon) + "'");
    std::size_t count = 0;
    try {
      count = static_cast<std::size_t>(std::stoull(part.substr(colon + 1)));
    } catch (const std::exception&) {
      usage_error("bad count in --mix entry " + part);
    }
    out.emplace_back(*kind, count);
  }
  if (out.empty()) usage_error("--mix is empty");
  return out;
}

void cmd_gen(const RunConfig& cfg, const Flags& f, const Registered& r, std::ostream& out) {
  std::vector<std::pair<ProfileKind, std::size_t>> parts;
  if (r.given("mix")) {
    parts = parse_mix(f.mix);
  } else {
    if (!r.given("profile") || !r.given("count")) usage_error("gen needs --profile and --count, or --mix");
    parts.emplace_back(*parse_profile_kind(f.profile), f.count);
  }

  std::vector<ProfileCount> components;
  json comp_json = json::array();
  for (std::size_t i = 0; i < parts.size(); ++i) {
    SyntheticProfile p{.kind = parts[i].first,
                       .min_length = f.min_length,
                       .max_length = f.max_length,
                       .base_entropy = f.base_entropy,
                       .noise_scale = f.noise,
                       .min_events = f.min_events,
                       .max_events = f.max_events,
                       .seed = cfg.seed + i};
    components.push_back({p, parts[i].second});
    comp_json.push_back(json{{"kind", std::string(to_string(p.kind))},
                             {"count", parts[i].second},
                             {"seed", p.seed}});
  }
  SyntheticOptions opts{.spike = cfg.spike,
                        .prompts = f.prompts,
                        .vocab_size = f.vocab_size,
                        .with_text = f.with_text};
  const auto records = generate_mixture(components, opts, cfg.seed ^ 0x9E3779B97F4A7C15ULL);

  auto h = header("gen", cfg);
  h["gen"] = json{{"components", std::move(comp_json)},
                  {"prompts", f.prompts},
                  {"noise", f.noise},
                  {"base_entropy", f.base_entropy},
                  {"min_length", f.min_length},
                  {"max_length", f.max_length},
                  {"min_events", f.min_events},
                  {"max_events", f.max_events},
                  {"vocab_size", f.vocab_size},
                  {"with_text", f.with_text}};
  Output o(cfg.out, out);
  o.line(h);
  for (const auto& rec : records) o.line(record_to_json(rec));
  o.finish();
}

constexpr const char* kExitCodeHelp =
    "Exit codes:\n"
    "  0  success\n"
    "  1  internal error\n"
    "  2  usage: unknown flag, conflicting options or invalid option value\n"
    "  3  input: missing/unreadable input or unwritable output\n"
    "  4  data: malformed record, empty trajectory or invalid distribution\n"
    "  5  analysis: valid data but the requested computation is undefined\n"
    "     (k larger than the pool, missing labels or scores, ...)\n"
    "Failures print one JSON error record on stderr.";

void write_error(std::ostream& err, std::string_view code, int exit_code, const std::string& msg) {
  err << json{{"record", "error"}, {"code", code}, {"exit_code", exit_code}, {"message", msg}}.dump()
      << '\n';
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  log::ScopedSink sink([&err](std::string_view msg) { err << "warning: " << msg << '\n'; });

  CLI::App app{"Entropy-dynamics instability scoring for LLM generations", "edis"};
  app.set_version_flag("--version", kVersion);
  app.footer(kExitCodeHelp);
  app.require_subcommand(1);

  Flags f;
  Registered r;

  auto* score = app.add_subcommand("score", "per-response EDIS, mean entropy, self-certainty, spike counts");
  auto* select = app.add_subcommand("select", "best-k-of-N filtering per prompt with accuracy metrics");
  auto* vote = app.add_subcommand("vote", "majority and score-weighted answer voting per prompt");
  auto* curate = app.add_subcommand("curate", "RL sample filtering and advantage re-weighting");
  auto* eval = app.add_subcommand("eval", "AUC, correlations, retention curves, spike statistics");
  auto* heatmap = app.add_subcommand("heatmap", "token-level entropy and spike heatmaps (HTML)");
  auto* gen = app.add_subcommand("gen", "synthetic trace generation");

  std::map<CLI::App*, Registered> regs;
  for (auto* sub : {score, select, vote, curate, heatmap}) add_common(sub, f, regs[sub], true);
  add_common(eval, f, regs[eval], false);
  add_common(gen, f, regs[gen], false);

  regs[select].opts["k"] = select->add_option("--k", f.k, "responses kept per prompt (default 8)");
  regs[select].opts["m-list"] =
      select->add_option("--m", f.m_list,
                         "oversampling multipliers, comma separated; pool = first m*k candidates "
                         "(e.g. 1,2,4,8,16; default: whole pool)")
          ->delimiter(',');
  regs[select].opts["metric"] = add_metric(select, f);

  regs[vote].opts["epsilon"] =
      vote->add_option("--epsilon", f.epsilon, "inverse-weight offset (default 0.1)");

  regs[curate].opts["alpha"] =
      curate->add_option("--alpha", f.alpha, "softmax temperature (default 1.8)");
  regs[curate].opts["target-n"] =
      curate->add_option("--target-n", f.target_n, "filter each prompt group to N responses");
  regs[curate].opts["m-real"] = curate->add_option(
      "--m", f.m_real, "oversampling multiplier; filter to round(group size / m)");
  regs[curate].opts["z-scope"] =
      curate->add_option("--z-scope", f.z_scope, "z-score statistics per group or whole batch")
          ->check(CLI::IsMember({"group", "batch"}));
  regs[curate].opts["target-n"]->excludes(regs[curate].opts["m-real"]);

  regs[eval].opts["retention"] =
      eval->add_option("--retention", f.retention, "retention fractions (default 0.1,0.2,0.3,0.5)")
          ->delimiter(',');
  regs[eval].opts["checkpoint-series"] = eval->add_option(
      "--checkpoint-series", f.checkpoint_series, "JSONL of {step, mean_spikes_correct, mean_spikes_incorrect}");

  heatmap->add_option("--response-id", f.response_id, "render only this response");

  regs[gen].opts["profile"] =
      gen->add_option("--profile", f.profile, "stable|burst|rebound|mixed")
          ->check(CLI::IsMember({"stable", "burst", "rebound", "mixed"}));
  regs[gen].opts["count"] = gen->add_option("--count", f.count, "records to generate");
  regs[gen].opts["mix"] = gen->add_option("--mix", f.mix, "kind:count list, e.g. stable:200,rebound:200");
  regs[gen].opts["mix"]->excludes(regs[gen].opts["profile"])->excludes(regs[gen].opts["count"]);
  gen->add_option("--prompts", f.prompts, "prompt ids to deal records over (default 1)");
  gen->add_option("--noise", f.noise, "Gaussian noise scale, nats (default 0)");
  gen->add_option("--base-entropy", f.base_entropy, "baseline entropy, nats (default 0.3)");
  gen->add_option("--min-length", f.min_length, "minimum trajectory length (default 48)");
  gen->add_option("--max-length", f.max_length, "maximum trajectory length (default 96)");
  gen->add_option("--min-events", f.min_events, "minimum injected events (default 1)");
  gen->add_option("--max-events", f.max_events, "maximum injected events (default 1)");
  gen->add_option("--vocab-size", f.vocab_size, "vocab_size written to records (default 32000)");
  gen->add_flag("--with-text", f.with_text, "emit placeholder token text");

  std::vector<const char*> argv{"edis"};
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kOk;
    }
    write_error(err, "usage", kUsage, e.what());
    return kUsage;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const RunConfig cfg = resolve(f, regs[sub]);
    if (sub == score) cmd_score(cfg, out);
    else if (sub == select) cmd_select(cfg, out);
    else if (sub == vote) cmd_vote(cfg, out);
    else if (sub == curate) cmd_curate(cfg, out);
    else if (sub == eval) cmd_eval(cfg, out);
    else if (sub == heatmap) cmd_heatmap(cfg, f.response_id, out);
    else if (sub == gen) cmd_gen(cfg, f, regs[gen], out);
    return kOk;
  } catch (const Error& e) {
    const int code = exit_code_for(e.code());
    write_error(err, to_string(e.code()), code, e.what());
    return code;
  } catch (const std::exception& e) {
    write_error(err, "internal", kInternal, e.what());
    return kInternal;
  }
}

}  // namespace edis::cli
