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
#include "tiletune/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "tiletune/draft.hpp"
#include "tiletune/features.hpp"

namespace tiletune {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr double kSchedulerDecay = 0.9;
constexpr uint64_t kExhaustiveFallbackCap = 262144;  // enumerate below this to finish tiny spaces

constexpr uint64_t kTagExplore = 0x6578706cULL;
constexpr uint64_t kTagRandomMix = 0x726d6978ULL;
constexpr uint64_t kTagTrain = 0x7472616eULL;
constexpr uint64_t kTagMeasure = 0x6d656173ULL;
constexpr uint64_t kTagBaseline = 0x626c696eULL;

}  // namespace

void validate_config(const TunerConfig& cfg) {
  if (cfg.trials < 1) fail(err::kConfig, "trials must be >= 1");
  if (cfg.rounds < 1) fail(err::kConfig, "rounds must be >= 1");
  if (cfg.batch < 1) fail(err::kConfig, "batch must be >= 1");
  if (static_cast<int64_t>(cfg.rounds) * cfg.batch != cfg.trials)
    fail(err::kConfig, "rounds * batch must equal trials (" + std::to_string(cfg.rounds) + " * " +
                           std::to_string(cfg.batch) + " != " + std::to_string(cfg.trials) + ")");
  if (cfg.draft_size < cfg.batch) fail(err::kConfig, "draft_size must be >= batch");
  if (!(cfg.random_mix >= 0.0 && cfg.random_mix < 1.0))
    fail(err::kConfig, "random_mix must lie in [0, 1)");
  if (cfg.pop_size < 2) fail(err::kConfig, "pop_size must be >= 2");
  if (cfg.n_steps < 1) fail(err::kConfig, "n_steps must be >= 1");
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0))
    fail(err::kConfig, "momentum must lie in [0, 1)");
  if (cfg.hidden < 1) fail(err::kConfig, "hidden must be >= 1");
  if (cfg.train_epochs < 0) fail(err::kConfig, "train_epochs must be >= 0");
  if (cfg.threads < 1) fail(err::kConfig, "threads must be >= 1");
  if (!(cfg.lr >= 0.0)) fail(err::kConfig, "lr must be >= 0");
}

int task_scheduler(const std::vector<TaskState>& states, int round) {
  if (states.empty()) fail(err::kState, "task_scheduler: no tasks");
  for (std::size_t i = 0; i < states.size(); ++i)
    if (!states[i].saturated && !states[i].visited) return static_cast<int>(i);
  int best = -1;
  double best_score = -1.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const TaskState& s = states[i];
    if (s.saturated) continue;
    int stagnation = s.last_improvement_round >= 0 ? round - s.last_improvement_round : 0;
    double score = static_cast<double>(s.weight) * s.best_latency *
                   std::pow(kSchedulerDecay, stagnation);
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(i);
    }
  }
  if (best < 0) fail(err::kState, "task_scheduler: all task spaces exhausted");
  return best;
}

namespace {

struct TaskRuntime {
  SubgraphTask task;
  Sketch sketch;
  uint64_t space = 0;
  std::unordered_set<std::string> measured;
  // measured schedules kept for training and replay
  std::vector<HybridFeature> features;
  std::vector<double> latencies;
};

struct Candidate {
  Schedule sched;
  std::string key;
  double draft;
};

class Engine {
 public:
  Engine(const TunerConfig& cfg, const std::vector<SubgraphTask>& tasks,
         const DeviceSpec& device, const OracleDevice& oracle,
         const std::optional<SiameseState>& siamese,
         const std::optional<RankerParams>& pretrained)
      : cfg_(cfg), device_(device), oracle_(oracle), siamese_(siamese) {
    validate_config(cfg);
    if (tasks.empty()) fail(err::kConfig, "workload has no tasks");
    for (const auto& t : tasks) {
      TaskRuntime rt;
      rt.task = t;
      rt.sketch = generate_sketch(t.op, /*elementwise_fallback=*/true);
      rt.space = space_size(rt.sketch);
      runtimes_.push_back(std::move(rt));
      TaskState st;
      st.name = t.op.name;
      st.weight = t.weight;
      st.best_latency = std::numeric_limits<double>::infinity();
      states_.push_back(st);
    }
    if (cfg.momentum_adaptation) {
      if (!siamese_) fail(err::kConfig, "momentum adaptation requires a siamese checkpoint");
      if (siamese_->params.hidden != cfg.hidden)
        fail(err::kConfig, "siamese hidden width does not match config");
      siamese_state_ = *siamese_;
      siamese_state_->momentum = cfg.momentum;
      target_ = init_target(*siamese_state_);
    } else if (pretrained) {
      if (pretrained->hidden != cfg.hidden)
        fail(err::kConfig, "pretrained hidden width does not match config");
      target_ = *pretrained;
    } else {
      RngStream rng(derive_seed(cfg.seed, 0x696e6974ULL));
      target_ = init_params(cfg.hidden, rng);
    }
  }

  TuneResult run_draft_verify() {
    return run([this](int round, int ti, int want) { return round_draft_verify(round, ti, want); });
  }

  TuneResult run_baseline(BaselineKind kind) {
    switch (kind) {
      case BaselineKind::kRandom:
        return run([this](int round, int ti, int want) { return round_random(round, ti, want); });
      case BaselineKind::kPlainGa:
        return run([this](int round, int ti, int want) {
          return round_model_guided(round, ti, want, /*keep_pool=*/false);
        });
      case BaselineKind::kModelOnly:
        return run([this](int round, int ti, int want) {
          return round_model_guided(round, ti, want, /*keep_pool=*/true);
        });
    }
    fail(err::kState, "unknown baseline kind");
  }

 private:
  struct RoundOutcome {
    std::vector<Candidate> measured;
    std::vector<double> scores;  // aligned with measured
    uint64_t draft_evaluations = 0;
    uint64_t model_forwards = 0;
  };

  template <typename RoundFn>
  TuneResult run(const RoundFn& round_fn) {
    TuneResult result;
    int64_t remaining = cfg_.trials;
    for (int round = 0; round < cfg_.rounds && remaining > 0; ++round) {
      int ti;
      try {
        ti = task_scheduler(states_, round);
      } catch (const Error&) {
        result.partial = true;
        result.partial_reason = "all task spaces exhausted";
        break;
      }
      int want = static_cast<int>(std::min<int64_t>(cfg_.batch, remaining));
      RoundOutcome out = round_fn(round, ti, want);

      RoundStats stats;
      stats.round = round;
      stats.task = states_[ti].name;
      stats.draft_evaluations = out.draft_evaluations;
      stats.model_forwards = out.model_forwards;
      stats.measured = static_cast<int>(out.measured.size());
      stats.partial = stats.measured < want;
      result.rounds.push_back(stats);

      TaskRuntime& rt = runtimes_[ti];
      TaskState& st = states_[ti];
      st.visited = true;
      for (std::size_t i = 0; i < out.measured.size(); ++i) {
        const Candidate& cand = out.measured[i];
        RngStream mrng(derive_seed(oracle_.seed, kTagMeasure, hash_str(st.name), trial_index_));
        Measurement m = measure(rt.sketch, cand.sched, oracle_, mrng);
        ++trial_index_;
        --remaining;
        ++st.trials;
        rt.measured.insert(cand.key);
        rt.features.push_back(extract_features(rt.sketch, cand.sched, device_));
        rt.latencies.push_back(m.latency_s);
        if (m.latency_s < st.best_latency) {
          st.best_latency = m.latency_s;
          st.last_improvement_round = round;
        }
        TuningRecord rec;
        rec.task = st.name;
        rec.round = round;
        rec.schedule = cand.sched;
        rec.latency_s = m.latency_s;
        rec.draft_cost = cand.draft;
        rec.model_score = out.scores[i];
        result.records.push_back(std::move(rec));
      }
      if (rt.measured.size() >= rt.space) st.saturated = true;
      if (out.measured.empty()) st.saturated = true;  // nothing reachable was left

      if (cfg_.mode == TuneMode::kOnline && total_measured() >= 2) retrain(round);
    }
    if (remaining > 0 && !result.partial) {
      result.partial = true;
      result.partial_reason = "trial budget not exhausted (" + std::to_string(remaining) +
                              " trials unused)";
    }
    for (std::size_t i = 0; i < states_.size(); ++i) {
      if (!states_[i].visited) continue;
      TuneResult::BestEntry b;
      b.task = states_[i].name;
      b.latency_s = states_[i].best_latency;
      result.best.push_back(b);
    }
    std::unordered_map<std::string, std::pair<double, std::string>> best_by_task;
    for (const auto& rec : result.records) {
      const Sketch& sk = sketch_for(rec.task);
      std::string key = schedule_key(sk, rec.schedule);
      auto it = best_by_task.find(rec.task);
      if (it == best_by_task.end() || rec.latency_s < it->second.first)
        best_by_task[rec.task] = {rec.latency_s, key};
    }
    for (auto& b : result.best) {
      auto it = best_by_task.find(b.task);
      if (it != best_by_task.end()) b.schedule_key = it->second.second;
    }
    result.final_params = target_;
    result.final_siamese = siamese_state_;
    return result;
  }

  const Sketch& sketch_for(const std::string& task) const {
    for (const auto& rt : runtimes_)
      if (rt.task.op.name == task) return rt.sketch;
    fail(err::kState, "unknown task " + task);
  }

  int64_t total_measured() const {
    int64_t n = 0;
    for (const auto& rt : runtimes_) n += static_cast<int64_t>(rt.latencies.size());
    return n;
  }

  void retrain(int round) {
    std::vector<TaskSamples> dataset;
    for (const auto& rt : runtimes_) {
      if (rt.latencies.size() < 2) continue;
      TaskSamples ts;
      ts.task = rt.task.op.name;
      ts.features = rt.features;
      ts.latencies = rt.latencies;
      dataset.push_back(std::move(ts));
    }
    if (dataset.empty()) return;
    TrainConfig tc;
    tc.epochs = cfg_.train_epochs;
    tc.lr = cfg_.lr;
    tc.batch = cfg_.train_batch;
    tc.seed = derive_seed(cfg_.seed, kTagTrain, static_cast<uint64_t>(round));
    if (cfg_.momentum_adaptation) {
      AdaptResult r = momentum_adapt(*siamese_state_, dataset, tc);
      target_ = std::move(r.target);
      siamese_state_ = std::move(r.state);
    } else {
      train(target_, dataset, tc);
    }
  }

  // Drafted candidates followed by the random mix, deduplicated by key.
  std::vector<Candidate> build_draft_set(int round, int ti, uint64_t* draft_evals) {
    TaskRuntime& rt = runtimes_[ti];
    int n_spec = static_cast<int>(
        std::llround((1.0 - cfg_.random_mix) * static_cast<double>(cfg_.draft_size)));
    n_spec = std::max(1, n_spec);
    int n_random = cfg_.draft_size - n_spec;

    RngStream explore_rng(
        derive_seed(cfg_.seed, kTagExplore, static_cast<uint64_t>(round), hash_str(rt.task.op.name)));
    ExploreResult ex = explore(rt.task.op, device_, cfg_.n_steps, n_spec, cfg_.pop_size,
                               explore_rng, PenaltyToggles{}, cfg_.threads);
    *draft_evals = ex.evaluations;

    std::vector<Candidate> candidates;
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < ex.drafted.size(); ++i) {
      Candidate c{ex.drafted[i], schedule_key(rt.sketch, ex.drafted[i]), ex.draft_costs[i]};
      if (seen.insert(c.key).second) candidates.push_back(std::move(c));
    }
    if (n_random > 0) {
      RngStream mix_rng(
          derive_seed(cfg_.seed, kTagRandomMix, static_cast<uint64_t>(round), hash_str(rt.task.op.name)));
      auto randoms = random_init(rt.sketch, n_random, mix_rng);
      for (auto& sched : randoms) {
        Candidate c{sched, schedule_key(rt.sketch, sched), 0.0};
        if (!seen.insert(c.key).second) continue;
        c.draft = draft_cost(rt.sketch, c.sched, device_).total;
        candidates.push_back(std::move(c));
      }
    }
    return candidates;
  }

  // Lowest-draft-cost unmeasured schedules, for rounds that exhausted their
  // usual candidate source. Bypasses the learned model.
  std::vector<Candidate> exhaustion_fallback(int round, int ti, int want) {
    TaskRuntime& rt = runtimes_[ti];
    std::vector<Candidate> found;
    std::unordered_set<std::string> seen;
    RngStream rng(derive_seed(cfg_.seed, kTagBaseline, static_cast<uint64_t>(round) ^ 0xfa11ULL,
                              hash_str(rt.task.op.name)));
    int attempts = 200 * want;
    while (static_cast<int>(found.size()) < want && attempts-- > 0) {
      Schedule sched = random_init(rt.sketch, 1, rng)[0];
      std::string key = schedule_key(rt.sketch, sched);
      if (rt.measured.count(key) || seen.count(key)) continue;
      seen.insert(key);
      double cost = draft_cost(rt.sketch, sched, device_).total;
      found.push_back({std::move(sched), std::move(key), cost});
    }
    if (static_cast<int>(found.size()) < want && rt.space <= kExhaustiveFallbackCap) {
      for (const auto& sched : enumerate_all(rt.sketch, kExhaustiveFallbackCap)) {
        if (static_cast<int>(found.size()) >= want) break;
        std::string key = schedule_key(rt.sketch, sched);
        if (rt.measured.count(key) || seen.count(key)) continue;
        seen.insert(key);
        double cost = draft_cost(rt.sketch, sched, device_).total;
        found.push_back({sched, std::move(key), cost});
      }
    }
    std::stable_sort(found.begin(), found.end(),
                     [](const Candidate& a, const Candidate& b) { return a.draft < b.draft; });
    if (static_cast<int>(found.size()) > want) found.resize(want);
    return found;
  }

  RoundOutcome round_draft_verify(int round, int ti, int want) {
    TaskRuntime& rt = runtimes_[ti];
    RoundOutcome out;
    std::vector<Candidate> candidates = build_draft_set(round, ti, &out.draft_evaluations);

    std::vector<HybridFeature> feats(candidates.size());
    parallel_for(candidates.size(), cfg_.threads, [&](std::size_t i) {
      feats[i] = extract_features(rt.sketch, candidates[i].sched, device_);
    });
    uint64_t before = forward_calls();
    std::vector<double> scores = score_batch(target_, feats, {}, cfg_.threads);
    out.model_forwards = forward_calls() - before;

    std::vector<double> drafts(candidates.size());
    std::vector<char> excluded(candidates.size(), 0);
    std::size_t available = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      drafts[i] = candidates[i].draft;
      excluded[i] = rt.measured.count(candidates[i].key) ? 1 : 0;
      if (!excluded[i]) ++available;
    }
    std::size_t take = std::min<std::size_t>(want, available);
    if (take > 0) {
      for (std::size_t i : select_top(scores, drafts, excluded, take)) {
        out.measured.push_back(candidates[i]);
        out.scores.push_back(scores[i]);
      }
    }
    if (static_cast<int>(out.measured.size()) < want) {
      for (auto& cand : exhaustion_fallback(round, ti, want - static_cast<int>(out.measured.size()))) {
        out.measured.push_back(std::move(cand));
        out.scores.push_back(0.0);
      }
    }
    return out;
  }

  RoundOutcome round_random(int round, int ti, int want) {
    TaskRuntime& rt = runtimes_[ti];
    RoundOutcome out;
    RngStream rng(derive_seed(cfg_.seed, kTagBaseline, static_cast<uint64_t>(round),
                              hash_str(rt.task.op.name)));
    std::unordered_set<std::string> seen;
    int attempts = 200 * want;
    while (static_cast<int>(out.measured.size()) < want && attempts-- > 0) {
      Schedule sched = random_init(rt.sketch, 1, rng)[0];
      std::string key = schedule_key(rt.sketch, sched);
      if (rt.measured.count(key) || seen.count(key)) continue;
      seen.insert(key);
      double cost = draft_cost(rt.sketch, sched, device_).total;
      out.measured.push_back({std::move(sched), std::move(key), cost});
      out.scores.push_back(0.0);
    }
    if (static_cast<int>(out.measured.size()) < want) {
      for (auto& cand :
           exhaustion_fallback(round, ti, want - static_cast<int>(out.measured.size()))) {
        out.measured.push_back(std::move(cand));
        out.scores.push_back(0.0);
      }
    }
    return out;
  }

  // plain_ga (keep_pool = false): the final GA generation is the candidate
  // set. model_only (keep_pool = true): generations accumulate into a
  // best-by-score pool of draft_size, mirroring the two-stage pipeline with
  // the learned model in the explorer seat.
  RoundOutcome round_model_guided(int round, int ti, int want, bool keep_pool) {
    TaskRuntime& rt = runtimes_[ti];
    RoundOutcome out;
    RngStream rng(derive_seed(cfg_.seed, kTagBaseline, static_cast<uint64_t>(round),
                              hash_str(rt.task.op.name)));
    std::vector<Schedule> population = random_init(rt.sketch, cfg_.pop_size, rng);

    struct PoolEntry {
      Schedule sched;
      double score;
      double draft;
      uint64_t discovered;
    };
    std::unordered_map<std::string, PoolEntry> pool;
    uint64_t discovery = 0;

    std::vector<double> scores(population.size());
    std::vector<double> pseudo(population.size());
    uint64_t before = forward_calls();
    for (int step = 0; step < cfg_.n_steps; ++step) {
      std::vector<HybridFeature> feats(population.size());
      parallel_for(population.size(), cfg_.threads, [&](std::size_t i) {
        feats[i] = extract_features(rt.sketch, population[i], device_);
      });
      scores = score_batch(target_, feats, {}, cfg_.threads);
      for (std::size_t i = 0; i < population.size(); ++i) pseudo[i] = std::exp(-scores[i]);
      if (keep_pool) {
        for (std::size_t i = 0; i < population.size(); ++i) {
          std::string key = schedule_key(rt.sketch, population[i]);
          if (!pool.count(key))
            pool.emplace(std::move(key), PoolEntry{population[i], scores[i], 0.0, discovery++});
        }
        if (pool.size() > static_cast<std::size_t>(cfg_.draft_size)) {
          std::vector<std::pair<std::string, PoolEntry>> entries(pool.begin(), pool.end());
          std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
            if (a.second.score != b.second.score) return a.second.score > b.second.score;
            return a.second.discovered < b.second.discovered;
          });
          entries.resize(cfg_.draft_size);
          pool = std::unordered_map<std::string, PoolEntry>(entries.begin(), entries.end());
        }
      }
      if (step + 1 < cfg_.n_steps) population = mutate(population, rt.sketch, pseudo, rng);
    }
    out.model_forwards = forward_calls() - before;

    std::vector<Candidate> candidates;
    std::vector<double> cscores;
    if (keep_pool) {
      std::vector<std::pair<std::string, PoolEntry>> entries(pool.begin(), pool.end());
      std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        return a.second.discovered < b.second.discovered;
      });
      for (auto& [key, e] : entries) {
        candidates.push_back({e.sched, key, draft_cost(rt.sketch, e.sched, device_).total});
        cscores.push_back(e.score);
      }
    } else {
      std::unordered_set<std::string> seen;
      for (std::size_t i = 0; i < population.size(); ++i) {
        std::string key = schedule_key(rt.sketch, population[i]);
        if (!seen.insert(key).second) continue;
        candidates.push_back(
            {population[i], std::move(key), draft_cost(rt.sketch, population[i], device_).total});
        cscores.push_back(scores[i]);
      }
    }

    std::vector<double> drafts(candidates.size());
    std::vector<char> excluded(candidates.size(), 0);
    std::size_t available = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      drafts[i] = candidates[i].draft;
      excluded[i] = rt.measured.count(candidates[i].key) ? 1 : 0;
      if (!excluded[i]) ++available;
    }
    std::size_t take = std::min<std::size_t>(want, available);
    if (take > 0) {
      for (std::size_t i : select_top(cscores, drafts, excluded, take)) {
        out.measured.push_back(candidates[i]);
        out.scores.push_back(cscores[i]);
      }
    }
    if (static_cast<int>(out.measured.size()) < want) {
      for (auto& cand :
           exhaustion_fallback(round, ti, want - static_cast<int>(out.measured.size()))) {
        out.measured.push_back(std::move(cand));
        out.scores.push_back(0.0);
      }
    }
    return out;
  }

  TunerConfig cfg_;
  DeviceSpec device_;
  OracleDevice oracle_;
  std::optional<SiameseState> siamese_;
  std::optional<SiameseState> siamese_state_;
  RankerParams target_;
  std::vector<TaskRuntime> runtimes_;
  std::vector<TaskState> states_;
  uint64_t trial_index_ = 0;
};

}  // namespace

TuneResult tune_full_graph(const TunerConfig& cfg, const std::vector<SubgraphTask>& tasks,
                           const DeviceSpec& device, const OracleDevice& oracle,
                           const std::optional<SiameseState>& siamese,
                           const std::optional<RankerParams>& pretrained) {
  Engine engine(cfg, tasks, device, oracle, siamese, pretrained);
  return engine.run_draft_verify();
}

TuneResult baseline_search(BaselineKind kind, const TunerConfig& cfg,
                           const std::vector<SubgraphTask>& tasks, const DeviceSpec& device,
                           const OracleDevice& oracle,
                           const std::optional<RankerParams>& pretrained) {
  TunerConfig adjusted = cfg;
  adjusted.momentum_adaptation = false;  // baselines run plain fine-tuning
  Engine engine(adjusted, tasks, device, oracle, {}, pretrained);
  return engine.run_baseline(kind);
}

BaselineKind baseline_kind_from_name(const std::string& name) {
  if (name == "random") return BaselineKind::kRandom;
  if (name == "plain_ga") return BaselineKind::kPlainGa;
  if (name == "model_only") return BaselineKind::kModelOnly;
  fail(err::kConfig, "unknown baseline \"" + name + "\" (random, plain_ga, model_only)");
}

const char* baseline_kind_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kRandom:
      return "random";
    case BaselineKind::kPlainGa:
      return "plain_ga";
    case BaselineKind::kModelOnly:
      return "model_only";
  }
  return "?";
}

std::map<std::string, Sketch> sketch_map(const std::vector<SubgraphTask>& tasks) {
  std::map<std::string, Sketch> out;
  for (const auto& t : tasks) out.emplace(t.op.name, generate_sketch(t.op, true));
  return out;
}

std::string records_to_jsonl(const std::vector<TuningRecord>& records,
                             const std::map<std::string, Sketch>& sketches) {
  std::string out;
  for (const auto& rec : records) {
    auto it = sketches.find(rec.task);
    if (it == sketches.end()) fail(err::kState, "record references unknown task " + rec.task);
    const Sketch& sk = it->second;
    ordered_json j;
    j["task"] = rec.task;
    j["round"] = rec.round;
    ordered_json axes;
    for (std::size_t i = 0; i < sk.spatial.size(); ++i)
      axes[sk.spatial[i].axis] = rec.schedule.spatial_factors[i];
    for (std::size_t i = 0; i < sk.reduction.size(); ++i)
      axes[sk.reduction[i].axis] = rec.schedule.reduction_factors[i];
    j["schedule"] = ordered_json{{"axes", std::move(axes)}, {"unroll", rec.schedule.unroll}};
    j["latency_s"] = rec.latency_s;
    j["draft_cost"] = rec.draft_cost;
    j["model_score"] = rec.model_score;
    out += j.dump();
    out += "\n";
  }
  return out;
}

std::vector<TuningRecord> records_from_jsonl(const std::string& text,
                                             const std::map<std::string, Sketch>& sketches) {
  std::vector<TuningRecord> records;
  std::set<std::pair<std::string, std::string>> seen;
  std::size_t pos = 0;
  int lineno = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const std::exception& e) {
      fail(err::kParse, "records line " + std::to_string(lineno) + ": " + e.what());
    }
    TuningRecord rec;
    rec.task = j.at("task").get<std::string>();
    auto it = sketches.find(rec.task);
    if (it == sketches.end())
      fail(err::kParse, "records line " + std::to_string(lineno) + ": unknown task " + rec.task);
    const Sketch& sk = it->second;
    rec.round = j.at("round").get<int>();
    const auto& jsched = j.at("schedule");
    const auto& axes = jsched.at("axes");
    for (const auto& slot : sk.spatial)
      rec.schedule.spatial_factors.push_back(axes.at(slot.axis).get<std::vector<int64_t>>());
    for (const auto& slot : sk.reduction)
      rec.schedule.reduction_factors.push_back(axes.at(slot.axis).get<std::vector<int64_t>>());
    rec.schedule.unroll = jsched.at("unroll").get<int64_t>();
    validate_schedule(sk, rec.schedule);
    rec.latency_s = j.at("latency_s").get<double>();
    rec.draft_cost = j.at("draft_cost").get<double>();
    rec.model_score = j.at("model_score").get<double>();
    if (!seen.emplace(rec.task, schedule_key(sk, rec.schedule)).second)
      fail(err::kValidate,
           "records line " + std::to_string(lineno) + ": duplicate (task, schedule) pair");
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<TrialOutcome> records_to_outcomes(const std::vector<TuningRecord>& records,
                                              const std::vector<SubgraphTask>& tasks) {
  std::map<std::string, int64_t> weights;
  for (const auto& t : tasks) weights[t.op.name] = t.weight;
  std::vector<TrialOutcome> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    auto it = weights.find(rec.task);
    if (it == weights.end()) fail(err::kState, "record references unknown task " + rec.task);
    out.push_back({rec.task, it->second, rec.latency_s});
  }
  return out;
}

}  // namespace tiletune
