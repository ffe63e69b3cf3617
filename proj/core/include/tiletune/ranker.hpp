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
#ifndef TILETUNE_RANKER_HPP_
#define TILETUNE_RANKER_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tiletune/common.hpp"
#include "tiletune/features.hpp"

namespace tiletune {

/// Row-major dense matrix of doubles. The whole model runs in double
/// precision so analytic gradients can be checked against central finite
/// differences at 1e-4 relative tolerance.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}
  double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
};

/// Two-branch ranking model. The statement branch encodes each statement
/// vector with two tanh layers and sums the results; the dataflow branch
/// embeds each block, runs one single-head scaled dot-product self-attention
/// layer and mean-pools; the head concatenates both and maps 2h -> h -> 1.
/// Higher score means predicted faster.
struct RankerParams {
  int hidden = 0;
  Tensor stmt_w1, stmt_b1;  // 24 x h, 1 x h
  Tensor stmt_w2, stmt_b2;  // h x h, 1 x h
  Tensor embed_w, embed_b;  // 23 x h, 1 x h
  Tensor attn_wq, attn_bq;  // h x h, 1 x h
  Tensor attn_wk, attn_bk;
  Tensor attn_wv, attn_bv;
  Tensor head_w1, head_b1;  // 2h x h, 1 x h
  Tensor head_w2, head_b2;  // h x 1, 1 x 1
};

/// Xavier-uniform initialization, deterministic in the rng stream.
RankerParams init_params(int hidden, RngStream& rng);
RankerParams zeros_like(const RankerParams& params);

void for_each_tensor(RankerParams& p,
                     const std::function<void(const std::string&, Tensor&)>& fn);
void for_each_tensor(const RankerParams& p,
                     const std::function<void(const std::string&, const Tensor&)>& fn);
void check_same_shape(const RankerParams& a, const RankerParams& b);

struct ScoreOptions {
  /// Test hook: replaces the attention layer with the identity map, which
  /// makes the dataflow branch a pure mean-pool (permutation invariant).
  bool attention_identity = false;
};

double score(const RankerParams& params, const HybridFeature& feat,
             const ScoreOptions& opts = {});

/// Per-item results identical to calling score() element-wise.
std::vector<double> score_batch(const RankerParams& params,
                                const std::vector<HybridFeature>& feats,
                                const ScoreOptions& opts = {}, int threads = 1);

/// Computes the score and accumulates dscore * d(score)/d(theta) into grads.
double score_backward(const RankerParams& params, const HybridFeature& feat, double dscore,
                      RankerParams& grads, const ScoreOptions& opts = {});

/// Number of score() evaluations since the last reset; instrumentation for
/// the per-round inference budget.
uint64_t forward_calls();
void reset_forward_calls();

struct RankLossResult {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d score_i
};

/// Pairwise logistic rank loss over all ordered pairs (i, j) with
/// latency_i < latency_j, weighted by |delta NDCG| computed from the
/// normalized-latency relevance rel_i = min_latency / latency_i with gain
/// 2^rel - 1 and discount 1/log2(1 + position) under the current score
/// ranking (ties by index). loss = sum w_ij * log(1 + exp(-(s_i - s_j))).
RankLossResult lambda_rank_loss(const std::vector<double>& scores,
                                const std::vector<double>& latencies);

struct TaskSamples {
  std::string task;
  std::vector<HybridFeature> features;
  std::vector<double> latencies;
};

struct TrainConfig {
  int epochs = 8;
  double lr = 1e-2;
  int batch = 256;  // max candidates drawn per task per step
  uint64_t seed = 0;
  ScoreOptions score_opts;
};

struct TrainReport {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::vector<double> epoch_losses;
};

/// Plain gradient descent on the rank loss with per-task listwise batches.
/// Deterministic given the config seed; lr = 0 leaves params bit-identical.
TrainReport train(RankerParams& params, const std::vector<TaskSamples>& dataset,
                  const TrainConfig& cfg);

/// Indices of the b best candidates by descending score; ties broken by
/// lower draft cost, then by index. Excluded entries are never selected.
/// Errors if fewer than b candidates are available.
std::vector<std::size_t> select_top(const std::vector<double>& scores,
                                    const std::vector<double>& draft_costs,
                                    const std::vector<char>& excluded, std::size_t b);

/// Versioned JSON checkpoint with a shape header. Doubles round-trip
/// exactly.
std::string serialize_params(const RankerParams& params);
RankerParams parse_params(const std::string& text);
void save_params(const RankerParams& params, const std::string& path);
RankerParams load_params(const std::string& path);

}  // namespace tiletune

#endif  // TILETUNE_RANKER_HPP_
