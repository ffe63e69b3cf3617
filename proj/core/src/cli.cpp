/*
 * Copyright 2026 The tiletune Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "tiletune/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tiletune/draft.hpp"
#include "tiletune/features.hpp"
#include "tiletune/metrics.hpp"
#include "tiletune/momentum.hpp"
#include "tiletune/oracle.hpp"
#include "tiletune/ranker.hpp"
#include "tiletune/tuner.hpp"
#include "tiletune/workload.hpp"

namespace tiletune {
namespace cli {

namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr uint64_t kEnumerationCap = 200000;

struct CommonInputs {
  std::string workload_path;
  std::string device_path;
  std::string oracle_path;
};

struct LoadedInputs {
  std::vector<SubgraphTask> tasks;
  DeviceSpec device;
  OracleDevice oracle;
};

LoadedInputs load_inputs(const CommonInputs& in, bool need_oracle) {
  LoadedInputs li;
  li.tasks = load_workload(in.workload_path);
  li.device = load_device(in.device_path);
  if (need_oracle || !in.oracle_path.empty()) li.oracle = load_oracle(in.oracle_path);
  return li;
}

void ensure_outdir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(err::kIo, "cannot create output directory " + dir + ": " + ec.message());
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void add_tuner_flags(CLI::App* cmd, TunerConfig& cfg) {
  cmd->add_option("--trials", cfg.trials, "Total measurement trials (= rounds * batch)")
      ->capture_default_str();
  cmd->add_option("--rounds", cfg.rounds, "Number of tuning rounds")->capture_default_str();
  cmd->add_option("--batch", cfg.batch, "Measurements per round")->capture_default_str();
  cmd->add_option("--draft-size", cfg.draft_size,
                  "Candidates handed to the learned model per round")
      ->capture_default_str();
  cmd->add_option("--pop-size", cfg.pop_size, "Explorer population size")->capture_default_str();
  cmd->add_option("--n-steps", cfg.n_steps, "Explorer generations per round")
      ->capture_default_str();
  cmd->add_option("--random-mix", cfg.random_mix,
                  "Fraction of the draft set drawn fresh at random")
      ->capture_default_str();
  cmd->add_option("--momentum", cfg.momentum, "Momentum of the online-adaptation state")
      ->capture_default_str();
  cmd->add_option("--hidden", cfg.hidden, "Hidden width of the ranking model")
      ->capture_default_str();
  cmd->add_option("--lr", cfg.lr, "Learning rate for online training")->capture_default_str();
  cmd->add_option("--train-epochs", cfg.train_epochs, "Training epochs per round")
      ->capture_default_str();
  cmd->add_option("--train-batch", cfg.train_batch, "Max candidates per task per training step")
      ->capture_default_str();
  cmd->add_option("--threads", cfg.threads, "Worker threads for candidate evaluation")
      ->capture_default_str();
}

ordered_json round_stats_json(const TuneResult& result) {
  ordered_json rounds = ordered_json::array();
  for (const auto& r : result.rounds) {
    rounds.push_back(ordered_json{{"round", r.round},
                                  {"task", r.task},
                                  {"draft_evaluations", r.draft_evaluations},
                                  {"model_forwards", r.model_forwards},
                                  {"measured", r.measured},
                                  {"partial", r.partial}});
  }
  return rounds;
}

ordered_json best_json(const TuneResult& result) {
  ordered_json best = ordered_json::array();
  for (const auto& b : result.best) {
    best.push_back(ordered_json{
        {"task", b.task}, {"schedule", b.schedule_key}, {"latency_s", b.latency_s}});
  }
  return best;
}

void write_tune_artifacts(const std::string& outdir, const TuneResult& result,
                          const std::vector<SubgraphTask>& tasks, std::ostream& out) {
  auto sketches = sketch_map(tasks);
  write_file(join_path(outdir, "records.jsonl"), records_to_jsonl(result.records, sketches));

  ordered_json bestdoc;
  bestdoc["tasks"] = best_json(result);
  bestdoc["partial"] = result.partial;
  if (result.partial) bestdoc["partial_reason"] = result.partial_reason;
  write_file(join_path(outdir, "best_schedules.json"), bestdoc.dump(2) + "\n");

  std::vector<std::pair<std::string, int64_t>> universe;
  for (const auto& t : tasks) universe.emplace_back(t.op.name, t.weight);
  TuningCurve curve = tuning_curve(records_to_outcomes(result.records, tasks), universe);
  write_file(join_path(outdir, "curve.csv"), curve_to_csv(curve));

  ordered_json summary;
  summary["trials_measured"] = result.records.size();
  summary["rounds_run"] = result.rounds.size();
  summary["partial"] = result.partial;
  if (result.partial) summary["partial_reason"] = result.partial_reason;
  summary["best"] = best_json(result);
  summary["rounds"] = round_stats_json(result);
  write_file(join_path(outdir, "summary.json"), summary.dump(2) + "\n");

  save_params(result.final_params, join_path(outdir, "model.json"));
  if (result.final_siamese)
    save_siamese(*result.final_siamese, join_path(outdir, "siamese.json"));

  out << "measured " << result.records.size() << " trials over " << result.rounds.size()
      << " rounds\n";
  for (const auto& b : result.best) {
    out << "  " << b.task << ": best " << std::scientific << std::setprecision(6) << b.latency_s
        << " s  (" << b.schedule_key << ")\n";
  }
  out.unsetf(std::ios::scientific);
  if (result.partial) out << "note: partial run - " << result.partial_reason << "\n";
}

// Samples up to n distinct schedules per task and labels them with simulated
// measurements; the shared dataset builder behind train and eval.
struct SampledData {
  std::vector<TaskSamples> samples;                  // features + measured latency
  std::vector<std::vector<Schedule>> schedules;      // aligned with tasks
  std::vector<std::vector<double>> noiseless;        // aligned with tasks
};

SampledData sample_labeled(const LoadedInputs& li, int per_task, uint64_t seed, bool noisy,
                           int threads) {
  SampledData data;
  auto sketches = sketch_map(li.tasks);
  uint64_t trial = 0;
  for (const auto& task : li.tasks) {
    const Sketch& sk = sketches.at(task.op.name);
    RngStream rng(derive_seed(seed, 0x73616d70ULL, hash_str(task.op.name)));
    std::vector<Schedule> scheds;
    std::set<std::string> seen;
    int attempts = per_task * 20;
    while (static_cast<int>(scheds.size()) < per_task && attempts-- > 0) {
      Schedule s = random_init(sk, 1, rng)[0];
      if (seen.insert(schedule_key(sk, s)).second) scheds.push_back(std::move(s));
    }
    TaskSamples ts;
    ts.task = task.op.name;
    ts.features.resize(scheds.size());
    ts.latencies.resize(scheds.size());
    std::vector<double> noiseless(scheds.size());
    parallel_for(scheds.size(), threads, [&](std::size_t i) {
      ts.features[i] = extract_features(sk, scheds[i], li.device);
      noiseless[i] = noiseless_latency(sk, scheds[i], li.oracle);
    });
    for (std::size_t i = 0; i < scheds.size(); ++i) {
      if (noisy) {
        RngStream mrng(derive_seed(li.oracle.seed, 0x6d656173ULL, hash_str(task.op.name), trial++));
        ts.latencies[i] = noiseless[i] * mrng.lognormal(li.oracle.noise_sigma);
      } else {
        ts.latencies[i] = noiseless[i];
      }
    }
    data.samples.push_back(std::move(ts));
    data.schedules.push_back(std::move(scheds));
    data.noiseless.push_back(std::move(noiseless));
  }
  return data;
}

int run_tune(const CommonInputs& inputs, TunerConfig cfg, const std::string& mode,
             bool momentum_adaptation, const std::string& model_path,
             const std::string& siamese_path, const std::string& outdir, std::ostream& out) {
  cfg.mode = mode == "offline" ? TuneMode::kOffline : TuneMode::kOnline;
  if (mode != "online" && mode != "offline")
    fail(err::kConfig, "mode must be online or offline, got \"" + mode + "\"");
  cfg.momentum_adaptation = momentum_adaptation;
  LoadedInputs li = load_inputs(inputs, true);

  std::optional<SiameseState> siamese;
  std::optional<RankerParams> pretrained;
  if (momentum_adaptation) {
    if (siamese_path.empty())
      fail(err::kConfig, "--momentum-adaptation requires --siamese <checkpoint>");
    siamese = load_siamese(siamese_path);
  }
  if (!model_path.empty()) pretrained = load_params(model_path);

  ensure_outdir(outdir);
  TuneResult result = tune_full_graph(cfg, li.tasks, li.device, li.oracle, siamese, pretrained);
  write_tune_artifacts(outdir, result, li.tasks, out);
  return 0;
}

int run_train(const CommonInputs& inputs, int samples, int epochs, double lr, int batch,
              int hidden, uint64_t seed, const std::string& init_path,
              const std::string& outdir, int threads, std::ostream& out) {
  LoadedInputs li = load_inputs(inputs, true);
  if (samples < 2) fail(err::kConfig, "--samples must be >= 2");
  SampledData data = sample_labeled(li, samples, seed, /*noisy=*/true, threads);

  RankerParams params;
  if (!init_path.empty()) {
    params = load_params(init_path);
    if (params.hidden != hidden && hidden != 0)
      fail(err::kConfig, "--hidden conflicts with the initial checkpoint width");
  } else {
    RngStream rng(derive_seed(seed, 0x696e6974ULL));
    params = init_params(hidden, rng);
  }
  TrainConfig tc;
  tc.epochs = epochs;
  tc.lr = lr;
  tc.batch = batch;
  tc.seed = seed;
  TrainReport report = train(params, data.samples, tc);

  ensure_outdir(outdir);
  save_params(params, join_path(outdir, "model.json"));
  ordered_json jr;
  jr["initial_loss"] = report.initial_loss;
  jr["final_loss"] = report.final_loss;
  jr["epoch_losses"] = report.epoch_losses;
  write_file(join_path(outdir, "train_report.json"), jr.dump(2) + "\n");
  out << "trained on ";
  std::size_t total = 0;
  for (const auto& t : data.samples) total += t.features.size();
  out << total << " labeled schedules; loss " << report.initial_loss << " -> "
      << report.final_loss << "\n";
  return 0;
}

int run_eval(const CommonInputs& inputs, const std::string& model_path, int samples,
             const std::vector<int>& ks, const std::vector<int>& sizes, uint64_t seed,
             int pop_size, int n_steps, const std::string& outdir, int threads,
             std::ostream& out) {
  LoadedInputs li = load_inputs(inputs, true);
  auto sketches = sketch_map(li.tasks);
  SampledData data = sample_labeled(li, samples, seed, /*noisy=*/false, threads);

  // true optimum per task: exhaustive when enumerable, else sampled minimum
  std::vector<TaskLabels> labels;
  for (std::size_t ti = 0; ti < li.tasks.size(); ++ti) {
    TaskLabels tl;
    tl.task = li.tasks[ti].op.name;
    tl.weight = li.tasks[ti].weight;
    tl.latencies = data.noiseless[ti];
    labels.push_back(std::move(tl));
  }
  LabeledDataset dataset = make_dataset(labels);
  for (std::size_t ti = 0; ti < li.tasks.size(); ++ti) {
    const Sketch& sk = sketches.at(li.tasks[ti].op.name);
    if (space_size(sk) <= kEnumerationCap)
      dataset.tasks[ti].best = oracle_best(sk, li.oracle, kEnumerationCap).latency_s;
  }

  ordered_json report;
  if (!model_path.empty()) {
    RankerParams params = load_params(model_path);
    std::vector<std::vector<double>> scores;
    for (std::size_t ti = 0; ti < li.tasks.size(); ++ti)
      scores.push_back(score_batch(params, data.samples[ti].features, {}, threads));
    ordered_json jt;
    for (int k : ks) jt["top_" + std::to_string(k)] = top_k(dataset, scores, k);
    report["ranking"] = jt;
    out << "ranking quality on " << samples << " sampled schedules/task:\n";
    for (int k : ks)
      out << "  top_" << k << " = " << std::fixed << std::setprecision(4)
          << jt["top_" + std::to_string(k)].get<double>() << "\n";
  }

  ordered_json jdraft = ordered_json::array();
  out << "draft quality (explorer drafted sets):\n";
  for (int size : sizes) {
    std::vector<std::vector<double>> drafted;
    for (std::size_t ti = 0; ti < li.tasks.size(); ++ti) {
      const Sketch& sk = sketches.at(li.tasks[ti].op.name);
      RngStream rng(derive_seed(seed, 0x6576616cULL, hash_str(li.tasks[ti].op.name),
                                static_cast<uint64_t>(size)));
      ExploreResult ex = explore(li.tasks[ti].op, li.device, n_steps, size, pop_size, rng, {},
                                 threads);
      std::vector<double> lats(ex.drafted.size());
      parallel_for(ex.drafted.size(), threads, [&](std::size_t i) {
        lats[i] = noiseless_latency(sk, ex.drafted[i], li.oracle);
      });
      drafted.push_back(std::move(lats));
    }
    ordered_json row;
    row["size"] = size;
    for (int k : ks) row["best_" + std::to_string(k)] = best_k(dataset, drafted, k);
    out << "  size " << std::setw(4) << size << ":";
    for (int k : ks)
      out << "  best_" << k << " = " << std::fixed << std::setprecision(4)
          << row["best_" + std::to_string(k)].get<double>();
    out << "\n";
    jdraft.push_back(std::move(row));
  }
  report["draft"] = jdraft;

  if (!outdir.empty()) {
    ensure_outdir(outdir);
    write_file(join_path(outdir, "metrics.json"), report.dump(2) + "\n");
  }
  return 0;
}

int run_bench(const CommonInputs& inputs, TunerConfig cfg, const std::vector<uint64_t>& seeds,
              std::vector<std::string> baselines, const std::string& model_path,
              const std::string& siamese_path, bool momentum_adaptation, double tolerance,
              const std::string& outdir, std::ostream& out) {
  LoadedInputs li = load_inputs(inputs, true);
  auto sketches = sketch_map(li.tasks);
  ensure_outdir(outdir);

  cfg.momentum_adaptation = momentum_adaptation;
  std::optional<SiameseState> siamese;
  std::optional<RankerParams> pretrained;
  if (momentum_adaptation) {
    if (siamese_path.empty())
      fail(err::kConfig, "--momentum-adaptation requires --siamese <checkpoint>");
    siamese = load_siamese(siamese_path);
  }
  if (!model_path.empty()) pretrained = load_params(model_path);

  // target: weighted sum of true optima, all tasks must be enumerable
  double target_sum = 0.0;
  for (const auto& task : li.tasks) {
    const Sketch& sk = sketches.at(task.op.name);
    uint64_t space = space_size(sk);
    if (space > kEnumerationCap)
      fail(err::kConfig, "bench needs enumerable tasks; " + task.op.name + " has space " +
                             std::to_string(space));
    target_sum += static_cast<double>(task.weight) * oracle_best(sk, li.oracle, kEnumerationCap).latency_s;
  }
  double target = (1.0 + tolerance) * target_sum;

  std::vector<std::pair<std::string, int64_t>> universe;
  for (const auto& t : li.tasks) universe.emplace_back(t.op.name, t.weight);

  std::vector<std::string> methods{"draft_verify"};
  for (const auto& b : baselines) methods.push_back(b);

  std::map<std::string, std::vector<std::optional<int64_t>>> ttt;
  for (uint64_t seed : seeds) {
    for (const auto& method : methods) {
      TunerConfig run_cfg = cfg;
      run_cfg.seed = seed;
      TuneResult result;
      if (method == "draft_verify") {
        result = tune_full_graph(run_cfg, li.tasks, li.device, li.oracle, siamese, pretrained);
      } else {
        result = baseline_search(baseline_kind_from_name(method), run_cfg, li.tasks, li.device,
                                 li.oracle, pretrained);
      }
      write_file(join_path(outdir, method + "_seed" + std::to_string(seed) + ".records.jsonl"),
                 records_to_jsonl(result.records, sketches));
      TuningCurve curve = tuning_curve(records_to_outcomes(result.records, li.tasks), universe);
      ttt[method].push_back(trials_to_target(curve, target));
    }
  }

  auto as_sortable = [&](const std::optional<int64_t>& v) {
    return v ? *v : cfg.trials + 1;  // unreached counts beyond the budget
  };
  ordered_json summary;
  summary["target_latency_weighted"] = target;
  summary["tolerance"] = tolerance;
  summary["seeds"] = seeds;
  ordered_json jm;
  std::map<std::string, int64_t> medians;
  for (const auto& method : methods) {
    std::vector<int64_t> vals;
    ordered_json per_seed = ordered_json::array();
    for (const auto& v : ttt[method]) {
      vals.push_back(as_sortable(v));
      if (v)
        per_seed.push_back(*v);
      else
        per_seed.push_back(nullptr);
    }
    std::sort(vals.begin(), vals.end());
    int64_t median = vals[vals.size() / 2];
    if (vals.size() % 2 == 0) median = (vals[vals.size() / 2 - 1] + vals[vals.size() / 2]) / 2;
    medians[method] = median;
    jm[method] = ordered_json{{"trials_to_target", per_seed}, {"median", median}};
    out << std::setw(14) << method << ": median trials-to-target = " << median
        << (median > cfg.trials ? " (beyond budget)" : "") << "\n";
  }
  summary["methods"] = jm;

  ordered_json jcmp = ordered_json::array();
  for (const auto& method : methods) {
    if (method == "draft_verify") continue;
    int wins = 0;
    for (std::size_t i = 0; i < seeds.size(); ++i)
      if (as_sortable(ttt["draft_verify"][i]) < as_sortable(ttt[method][i])) ++wins;
    double p = sign_test_p(wins, static_cast<int>(seeds.size()));
    double ratio = static_cast<double>(medians["draft_verify"]) /
                   static_cast<double>(medians[method]);
    jcmp.push_back(ordered_json{{"baseline", method},
                                {"wins", wins},
                                {"n", seeds.size()},
                                {"sign_test_p", p},
                                {"median_ratio", ratio}});
    out << "  vs " << method << ": wins " << wins << "/" << seeds.size() << ", sign-test p = "
        << std::setprecision(4) << p << ", median ratio = " << ratio << "\n";
  }
  summary["comparisons"] = jcmp;
  write_file(join_path(outdir, "summary.json"), summary.dump(2) + "\n");
  return 0;
}

int run_inspect(const CommonInputs& inputs, const std::string& task_name,
                const std::string& schedule_str, const std::string& json_out,
                std::ostream& out) {
  LoadedInputs li = load_inputs(inputs, false);
  const SubgraphTask* task = nullptr;
  for (const auto& t : li.tasks)
    if (t.op.name == task_name) task = &t;
  if (!task) fail(err::kConfig, "workload has no task named \"" + task_name + "\"");
  Sketch sketch = generate_sketch(task->op, true);
  Schedule sched = schedule_from_key(sketch, schedule_str);

  auto symbols = extract_symbols(sketch, sched);
  DraftCost cost = draft_cost(sketch, sched, li.device);

  ordered_json jdoc;
  jdoc["task"] = task_name;
  jdoc["schedule"] = schedule_str;
  ordered_json jstmts = ordered_json::array();

  out << "statement          buffer   s1     s2     s3     s4    s5      s6   s7   s8\n";
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const auto& ss = symbols[i];
    const SymbolSet& s = ss.symbols;
    PenaltySet p = compute_penalties(s, li.device);
    std::string buffer =
        ss.stmt.buffer_index >= 0 ? task->op.buffers[ss.stmt.buffer_index].name : "-";
    out << std::left << std::setw(19) << statement_kind_name(ss.stmt.kind) << std::setw(9)
        << buffer << std::right;
    for (int64_t v : {s.s1, s.s2, s.s3, s.s4}) out << std::setw(6) << v << " ";
    out << std::setw(7) << s.s5 << " " << std::setw(5) << s.s6 << " " << std::setw(4) << s.s7
        << " " << std::setw(8) << s.s8 << "\n";
    ordered_json js;
    js["kind"] = statement_kind_name(ss.stmt.kind);
    js["buffer"] = buffer;
    js["symbols"] = ordered_json{{"s1", s.s1}, {"s2", s.s2}, {"s3", s.s3}, {"s4", s.s4},
                                 {"s5", s.s5}, {"s6", s.s6}, {"s7", s.s7}, {"s8", s.s8}};
    js["penalties"] =
        ordered_json{{"p_l0_m", p.p_l0_m}, {"p_l0_c", p.p_l0_c}, {"p_l1_m", p.p_l1_m},
                     {"p_l1_c", p.p_l1_c}, {"alpha_l1", p.alpha_l1}, {"p_l2_c", p.p_l2_c},
                     {"p_l2_m", p.p_l2_m}};
    js["trace"] = ordered_json{{"u_p", cost.per_statement[i].u_p},
                               {"u_m", cost.per_statement[i].u_m},
                               {"l_c", cost.per_statement[i].l_c},
                               {"l_m", cost.per_statement[i].l_m}};
    jstmts.push_back(std::move(js));
  }
  out << "\npenalties (per statement)\n";
  out << "statement          p_l0_m   p_l0_c   p_l1_m  p_l1_c  alpha  p_l2_c  p_l2_m\n";
  for (const auto& ss : symbols) {
    PenaltySet p = compute_penalties(ss.symbols, li.device);
    out << std::left << std::setw(19) << statement_kind_name(ss.stmt.kind) << std::right
        << std::fixed << std::setprecision(4) << std::setw(7) << p.p_l0_m << " " << std::setw(9)
        << p.p_l0_c << " " << std::setw(7) << p.p_l1_m << " " << std::setw(7) << p.p_l1_c << " "
        << std::setw(6) << p.alpha_l1 << " " << std::setw(7) << p.p_l2_c << " " << std::setw(7)
        << p.p_l2_m << "\n";
  }
  out << "\ntotal draft cost: " << std::scientific << std::setprecision(9) << cost.total
      << " s\n";
  jdoc["statements"] = std::move(jstmts);
  jdoc["total_draft_cost_s"] = cost.total;
  if (!json_out.empty()) write_file(json_out, jdoc.dump(2) + "\n");
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"tensor-program schedule autotuner over an abstract GPU memory hierarchy"};
  app.require_subcommand(1);

  // --- shared option storage ---
  CommonInputs inputs;
  TunerConfig cfg;
  std::string mode = "online";
  bool momentum_adaptation = false;
  std::string model_path, siamese_path, outdir = "out", init_path, json_out;
  uint64_t seed = 0;
  int samples = 1000;
  int epochs = 32;
  double lr = 1e-2;
  int batch = 256;
  int hidden = 64;
  int threads = 1;
  std::vector<int> ks{1, 5};
  std::vector<int> sizes{50, 128, 256, 512};
  std::vector<uint64_t> seeds;
  std::vector<std::string> baselines{"random", "model_only"};
  double tolerance = 0.05;
  std::string task_name, schedule_str;

  auto add_inputs = [&](CLI::App* cmd, bool need_oracle) {
    cmd->add_option("--workload", inputs.workload_path, "Workload JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--device", inputs.device_path, "Device abstraction file")
        ->required()
        ->check(CLI::ExistingFile);
    auto* opt = cmd->add_option("--oracle", inputs.oracle_path,
                                "Simulated-hardware oracle config file");
    if (need_oracle) opt->required()->check(CLI::ExistingFile);
  };

  CLI::App* tune = app.add_subcommand("tune", "Run the full two-stage tuning loop");
  add_inputs(tune, true);
  tune->set_config("--config", "", "TOML config file; flags override its values");
  add_tuner_flags(tune, cfg);
  tune->add_option("--seed", seed, "Base random seed (required: no silent nondeterminism)")
      ->required();
  tune->add_option("--mode", mode, "online (retrain each round) or offline (frozen model)")
      ->capture_default_str();
  tune->add_flag("--momentum-adaptation", momentum_adaptation,
                 "Adapt through a momentum-updated siamese state (needs --siamese)");
  tune->add_option("--model", model_path, "Initial/offline model checkpoint");
  tune->add_option("--siamese", siamese_path, "Siamese checkpoint for momentum adaptation");
  tune->add_option("--out", outdir, "Output directory")->capture_default_str();

  CLI::App* train_cmd = app.add_subcommand("train", "Train a ranking model on simulated labels");
  add_inputs(train_cmd, true);
  train_cmd->add_option("--seed", seed, "Base random seed")->required();
  train_cmd->add_option("--samples", samples, "Labeled schedules per task")
      ->capture_default_str();
  train_cmd->add_option("--epochs", epochs, "Training epochs")->capture_default_str();
  train_cmd->add_option("--lr", lr, "Learning rate")->capture_default_str();
  train_cmd->add_option("--batch", batch, "Max candidates per task per step")
      ->capture_default_str();
  train_cmd->add_option("--hidden", hidden, "Hidden width")->capture_default_str();
  train_cmd->add_option("--init", init_path, "Continue from this checkpoint");
  train_cmd->add_option("--threads", threads, "Worker threads")->capture_default_str();
  train_cmd->add_option("--out", outdir, "Output directory")->capture_default_str();

  CLI::App* eval_cmd = app.add_subcommand("eval", "Dataset metrics for a model and the explorer");
  add_inputs(eval_cmd, true);
  eval_cmd->add_option("--seed", seed, "Base random seed")->capture_default_str();
  eval_cmd->add_option("--model", model_path, "Model checkpoint to rank with");
  eval_cmd->add_option("--samples", samples, "Sampled schedules per task")
      ->capture_default_str();
  eval_cmd->add_option("--k", ks, "k values to report")->capture_default_str();
  eval_cmd->add_option("--sizes", sizes, "Drafted-set sizes to sweep")->capture_default_str();
  eval_cmd->add_option("--pop-size", cfg.pop_size, "Explorer population")->capture_default_str();
  eval_cmd->add_option("--n-steps", cfg.n_steps, "Explorer generations")->capture_default_str();
  eval_cmd->add_option("--threads", threads, "Worker threads")->capture_default_str();
  eval_cmd->add_option("--out", outdir, "Output directory (metrics.json)")->capture_default_str();

  CLI::App* bench = app.add_subcommand("bench", "Paired tuning runs against the baselines");
  add_inputs(bench, true);
  bench->set_config("--config", "", "TOML config file; flags override its values");
  add_tuner_flags(bench, cfg);
  bench->add_option("--seed", seeds, "Seeds for paired runs (repeatable)")->required();
  bench->add_option("--baselines", baselines, "Baselines: random, plain_ga, model_only")
      ->capture_default_str();
  bench->add_option("--model", model_path, "Pretrained model checkpoint");
  bench->add_option("--siamese", siamese_path, "Siamese checkpoint for momentum adaptation");
  bench->add_flag("--momentum-adaptation", momentum_adaptation,
                  "Enable momentum adaptation for the two-stage runs");
  bench->add_option("--target-tolerance", tolerance,
                    "Trials-to-target tolerance over the weighted optimum")
      ->capture_default_str();
  bench->add_option("--out", outdir, "Output directory")->capture_default_str();

  CLI::App* inspect = app.add_subcommand("inspect", "Symbol/penalty table for one schedule");
  add_inputs(inspect, false);
  inspect->add_option("--task", task_name, "Task name from the workload")->required();
  inspect->add_option("--schedule", schedule_str,
                      "Schedule key, e.g. \"m:4,8,2,2;n:4,8,2,2;k:4,8,4;u:1\"")
      ->required();
  inspect->add_option("--json", json_out, "Also write the table as JSON to this path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);  // --help
    err << "E_USAGE: " << e.what() << "\n";
    return 2;
  }

  try {
    if (tune->parsed()) {
      cfg.seed = seed;
      cfg.threads = std::max(cfg.threads, 1);
      return run_tune(inputs, cfg, mode, momentum_adaptation, model_path, siamese_path, outdir,
                      out);
    }
    if (train_cmd->parsed())
      return run_train(inputs, samples, epochs, lr, batch, hidden, seed, init_path, outdir,
                       threads, out);
    if (eval_cmd->parsed())
      return run_eval(inputs, model_path, samples, ks, sizes, seed, cfg.pop_size, cfg.n_steps,
                      outdir, threads, out);
    if (bench->parsed())
      return run_bench(inputs, cfg, seeds, baselines, model_path, siamese_path,
                       momentum_adaptation, tolerance, outdir, out);
    if (inspect->parsed())
      return run_inspect(inputs, task_name, schedule_str, json_out, out);
  } catch (const Error& e) {
    err << e.code() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "E_INTERNAL: " << e.what() << "\n";
    return 1;
  }
  err << "E_USAGE: no subcommand\n";
  return 2;
}

}  // namespace cli
}  // namespace tiletune
