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
#ifndef TILETUNE_TUNER_HPP_
#define TILETUNE_TUNER_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tiletune/metrics.hpp"
#include "tiletune/momentum.hpp"
#include "tiletune/oracle.hpp"
#include "tiletune/ranker.hpp"
#include "tiletune/workload.hpp"

namespace tiletune {

enum class TuneMode { kOnline, kOffline };

struct TunerConfig {
  int64_t trials = 2000;
  int rounds = 200;
  int batch = 10;          // measurements per round
  int draft_size = 512;    // candidates handed to the learned model per round
  int pop_size = 512;      // GA population
  int n_steps = 32;        // GA generations per round
  double random_mix = 0.2; // fraction of the draft set drawn fresh at random
  TuneMode mode = TuneMode::kOnline;
  bool momentum_adaptation = false;
  double momentum = 0.99;
  int hidden = 64;
  double lr = 1e-2;
  int train_epochs = 8;
  int train_batch = 256;
  uint64_t seed = 0;
  int threads = 1;
};

/// rounds * batch must equal trials; draft_size >= batch; random_mix in [0,1).
void validate_config(const TunerConfig& cfg);

struct TuningRecord {
  std::string task;
  int round = 0;
  Schedule schedule;
  double latency_s = 0.0;
  double draft_cost = 0.0;
  double model_score = 0.0;
};

struct TaskState {
  std::string name;
  int64_t weight = 1;
  double best_latency = 0.0;  // +inf until first measurement
  int64_t trials = 0;
  int last_improvement_round = -1;
  bool visited = false;
  bool saturated = false;  // search space exhausted
};

/// Picks the next task: unvisited tasks first (file order), then the argmax
/// of weight * best_latency * decay^stagnation with decay 0.9 and stagnation
/// counted in rounds since the task last improved. Saturated tasks are
/// skipped; errors when nothing is eligible.
int task_scheduler(const std::vector<TaskState>& states, int round);

struct RoundStats {
  int round = 0;
  std::string task;
  uint64_t draft_evaluations = 0;  // analyzer calls inside the explorer
  uint64_t model_forwards = 0;     // ranker forwards spent on selection
  int measured = 0;
  bool partial = false;
};

struct TuneResult {
  struct BestEntry {
    std::string task;
    std::string schedule_key;
    double latency_s = 0.0;
  };
  std::vector<TuningRecord> records;
  std::vector<RoundStats> rounds;
  std::vector<BestEntry> best;  // per task, tasks with at least one measurement
  bool partial = false;
  std::string partial_reason;
  RankerParams final_params;
  std::optional<SiameseState> final_siamese;
};

/// Full two-stage tuning over all subgraph tasks: per round the scheduler
/// picks a task, the explorer drafts candidates by analyzer cost, the
/// learned model ranks the draft set, the best batch is measured, and in
/// online mode the model is retrained on everything measured so far (with a
/// momentum-adapted state when enabled, which requires a siamese input).
TuneResult tune_full_graph(const TunerConfig& cfg, const std::vector<SubgraphTask>& tasks,
                           const DeviceSpec& device, const OracleDevice& oracle,
                           const std::optional<SiameseState>& siamese = {},
                           const std::optional<RankerParams>& pretrained = {});

enum class BaselineKind { kRandom, kPlainGa, kModelOnly };

BaselineKind baseline_kind_from_name(const std::string& name);
const char* baseline_kind_name(BaselineKind kind);

/// random: uniform sampling with dedup. plain_ga: GA guided by the learned
/// model over the whole population, measuring the best of the final
/// generation. model_only: the two-stage pipeline with the draft analyzer
/// replaced by the learned model, which therefore scores every explored
/// candidate. All emit the same record format.
TuneResult baseline_search(BaselineKind kind, const TunerConfig& cfg,
                           const std::vector<SubgraphTask>& tasks, const DeviceSpec& device,
                           const OracleDevice& oracle,
                           const std::optional<RankerParams>& pretrained = {});

std::map<std::string, Sketch> sketch_map(const std::vector<SubgraphTask>& tasks);

/// One record per line: {"task","round","schedule":{"axes":{...},"unroll"},
/// "latency_s","draft_cost","model_score"}.
std::string records_to_jsonl(const std::vector<TuningRecord>& records,
                             const std::map<std::string, Sketch>& sketches);
std::vector<TuningRecord> records_from_jsonl(const std::string& text,
                                             const std::map<std::string, Sketch>& sketches);

/// Measurement log in trial order, for curve extraction.
std::vector<TrialOutcome> records_to_outcomes(const std::vector<TuningRecord>& records,
                                              const std::vector<SubgraphTask>& tasks);

}  // namespace tiletune

#endif  // TILETUNE_TUNER_HPP_
