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
#include "tiletune/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "tiletune/common.hpp"

namespace tiletune {

LabeledDataset make_dataset(std::vector<TaskLabels> tasks) {
  LabeledDataset ds;
  for (auto& t : tasks) {
    if (t.weight < 1) fail(err::kValidate, "task " + t.task + ": weight must be >= 1");
    if (!t.latencies.empty()) {
      double best = t.latencies[0];
      for (double l : t.latencies) {
        if (!(l > 0.0)) fail(err::kValidate, "task " + t.task + ": latencies must be positive");
        best = std::min(best, l);
      }
      t.best = best;
    } else if (!(t.best > 0.0)) {
      fail(err::kValidate, "task " + t.task + ": needs labeled latencies or a known optimum");
    }
    ds.tasks.push_back(std::move(t));
  }
  if (ds.tasks.empty()) fail(err::kValidate, "dataset has no tasks");
  return ds;
}

double top_k(const LabeledDataset& dataset,
             const std::vector<std::vector<double>>& model_scores, int k) {
  if (k < 1) fail(err::kState, "top_k: k must be >= 1");
  if (model_scores.size() != dataset.tasks.size())
    fail(err::kState, "top_k: score lists must align with tasks");
  double numerator = 0.0;
  double denominator = 0.0;
  for (std::size_t ti = 0; ti < dataset.tasks.size(); ++ti) {
    const TaskLabels& task = dataset.tasks[ti];
    const auto& scores = model_scores[ti];
    if (scores.size() != task.latencies.size())
      fail(err::kState, "top_k: task " + task.task + ": scores/latencies length mismatch");
    if (static_cast<int>(scores.size()) < k)
      fail(err::kState, "top_k: task " + task.task + " has fewer than k schedules");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    // ties in score rank the worse latency first, making the result a lower bound
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      return task.latencies[a] > task.latencies[b];
    });
    double best_of_topk = task.latencies[order[0]];
    for (int j = 1; j < k; ++j)
      best_of_topk = std::min(best_of_topk, task.latencies[order[j]]);
    double w = static_cast<double>(task.weight);
    numerator += w * task.best;
    denominator += w * best_of_topk;
  }
  return numerator / denominator;
}

double best_k(const LabeledDataset& dataset,
              const std::vector<std::vector<double>>& drafted_latencies, int k) {
  if (k < 1) fail(err::kState, "best_k: k must be >= 1");
  if (drafted_latencies.size() != dataset.tasks.size())
    fail(err::kState, "best_k: latency lists must align with tasks");
  double numerator = 0.0;
  double denominator = 0.0;
  for (std::size_t ti = 0; ti < dataset.tasks.size(); ++ti) {
    const TaskLabels& task = dataset.tasks[ti];
    std::vector<double> lats = drafted_latencies[ti];
    if (static_cast<int>(lats.size()) < k)
      fail(err::kState, "best_k: task " + task.task + " has fewer than k drafted schedules");
    for (double l : lats)
      if (!(l > 0.0))
        fail(err::kState, "best_k: task " + task.task + ": latencies must be positive");
    std::nth_element(lats.begin(), lats.begin() + (k - 1), lats.end());
    double w = static_cast<double>(task.weight);
    numerator += w * task.best;
    denominator += w * lats[k - 1];
  }
  return numerator / denominator;
}

TuningCurve tuning_curve(const std::vector<TrialOutcome>& log,
                         const std::vector<std::pair<std::string, int64_t>>& tasks) {
  if (log.empty() && tasks.empty()) fail(err::kState, "tuning_curve: empty log");
  TuningCurve curve;
  std::map<std::string, std::size_t> index;
  std::vector<int64_t> weights;
  auto add_task = [&](const std::string& name, int64_t w) {
    if (index.count(name)) return;
    index[name] = curve.task_names.size();
    curve.task_names.push_back(name);
    weights.push_back(w);
  };
  for (const auto& [name, w] : tasks) add_task(name, w);
  for (const auto& t : log) add_task(t.task, t.weight);

  curve.per_task.resize(curve.task_names.size());
  std::vector<double> best(curve.task_names.size(),
                           std::numeric_limits<double>::infinity());
  curve.aggregate.reserve(log.size());
  for (std::size_t t = 0; t < log.size(); ++t) {
    std::size_t ti = index.at(log[t].task);
    if (log[t].latency_s < best[ti]) {
      best[ti] = log[t].latency_s;
      curve.per_task[ti].push_back({static_cast<int64_t>(t) + 1, best[ti]});
    }
    double agg = 0.0;
    for (std::size_t i = 0; i < best.size(); ++i) agg += static_cast<double>(weights[i]) * best[i];
    curve.aggregate.push_back(agg);
  }
  return curve;
}

std::optional<int64_t> trials_to_target(const TuningCurve& curve, double target) {
  for (std::size_t t = 0; t < curve.aggregate.size(); ++t)
    if (curve.aggregate[t] <= target) return static_cast<int64_t>(t) + 1;
  return std::nullopt;
}

double sign_test_p(int wins, int n) {
  if (n < 0 || wins < 0 || wins > n) fail(err::kState, "sign_test_p: bad arguments");
  // P(Binomial(n, 1/2) >= wins)
  long double p = 0.0L;
  long double coeff = 1.0L;  // C(n, 0)
  for (int k = 0; k <= n; ++k) {
    if (k >= wins) p += coeff;
    coeff = coeff * (n - k) / (k + 1);
  }
  return static_cast<double>(p / std::pow(2.0L, n));
}

std::string curve_to_csv(const TuningCurve& curve) {
  std::ostringstream out;
  out.precision(17);
  out << "trial,aggregate";
  for (const auto& name : curve.task_names) out << "," << name;
  out << "\n";
  std::vector<double> best(curve.task_names.size(), std::numeric_limits<double>::infinity());
  std::vector<std::size_t> cursor(curve.task_names.size(), 0);
  for (std::size_t t = 0; t < curve.aggregate.size(); ++t) {
    for (std::size_t i = 0; i < curve.per_task.size(); ++i) {
      while (cursor[i] < curve.per_task[i].size() &&
             curve.per_task[i][cursor[i]].trial <= static_cast<int64_t>(t) + 1) {
        best[i] = curve.per_task[i][cursor[i]].value;
        ++cursor[i];
      }
    }
    out << (t + 1) << "," << curve.aggregate[t];
    for (double b : best) {
      out << ",";
      if (std::isfinite(b)) out << b;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace tiletune
