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
#ifndef TILETUNE_METRICS_HPP_
#define TILETUNE_METRICS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tiletune {

/// Labeled schedules of one task: parallel arrays of model scores (filled by
/// the caller when ranking) and true latencies.
struct TaskLabels {
  std::string task;
  int64_t weight = 1;
  std::vector<double> latencies;
  double best = 0.0;  // the task's true minimum latency
};

struct LabeledDataset {
  std::vector<TaskLabels> tasks;
};

/// Builds per-task minima and validates positivity.
LabeledDataset make_dataset(std::vector<TaskLabels> tasks);

/// Weighted optimum-ratio of ranking quality: for each task, schedules are
/// ranked by descending model score (ties rank the worse latency first) and
/// the best latency among the top k counts. Returns
/// sum(w_i * best_i) / sum(w_i * min over top-k latencies).
double top_k(const LabeledDataset& dataset,
             const std::vector<std::vector<double>>& model_scores, int k);

/// Weighted optimum-ratio of a drafted set: the k-th smallest latency among
/// each task's drafted candidates counts.
/// Returns sum(w_i * best_i) / sum(w_i * kth_best_i).
double best_k(const LabeledDataset& dataset,
              const std::vector<std::vector<double>>& drafted_latencies, int k);

struct CurvePoint {
  int64_t trial = 0;  // 1-based global trial index
  double value = 0.0;
};

struct TuningCurve {
  std::vector<std::string> task_names;
  std::vector<std::vector<CurvePoint>> per_task;  // best-so-far per task
  /// Weighted aggregate sum(w_i * best_i(t)) per global trial; infinite until
  /// every task has at least one measurement.
  std::vector<double> aggregate;
};

struct TrialOutcome {
  std::string task;
  int64_t weight = 1;
  double latency_s = 0.0;
};

/// Best-so-far series from a measurement log (file order = trial order).
/// Passing the task universe makes the aggregate account for tasks that have
/// no measurements yet; otherwise tasks are discovered from the log.
TuningCurve tuning_curve(const std::vector<TrialOutcome>& log,
                         const std::vector<std::pair<std::string, int64_t>>& tasks = {});

/// First 1-based trial where the aggregate reaches target, if any.
std::optional<int64_t> trials_to_target(const TuningCurve& curve, double target);

/// One-sided sign test: probability of >= wins successes among n fair coin
/// flips.
double sign_test_p(int wins, int n);

std::string curve_to_csv(const TuningCurve& curve);

}  // namespace tiletune

#endif  // TILETUNE_METRICS_HPP_
