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
#include "tiletune/ranker.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "ranker_internal.hpp"

namespace tiletune {

namespace {

std::atomic<uint64_t> g_forward_calls{0};

constexpr double kInvLog2 = 1.4426950408889634074;  // 1/ln(2)

double log2d(double x) { return std::log(x) * kInvLog2; }

double softplus(double x) {
  if (x > 30.0) return x;
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0) {
    double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor xavier(int rows, int cols, RngStream& rng) {
  Tensor t(rows, cols);
  double limit = std::sqrt(6.0 / (rows + cols));
  for (double& x : t.v) x = (2.0 * rng.uniform_real() - 1.0) * limit;
  return t;
}

// y (n x p) = x (n x m) * w (m x p) + b (1 x p), tanh if act
Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b, bool act) {
  Tensor y(x.rows, w.cols);
  for (int i = 0; i < x.rows; ++i) {
    for (int k = 0; k < x.cols; ++k) {
      double xv = x.at(i, k);
      if (xv == 0.0) continue;
      const double* wrow = &w.v[static_cast<std::size_t>(k) * w.cols];
      double* yrow = &y.v[static_cast<std::size_t>(i) * y.cols];
      for (int j = 0; j < w.cols; ++j) yrow[j] += xv * wrow[j];
    }
    for (int j = 0; j < w.cols; ++j) {
      double z = y.at(i, j) + b.at(0, j);
      y.at(i, j) = act ? std::tanh(z) : z;
    }
  }
  return y;
}

// grads for y = act(x*w + b): given dy and the activated output y,
// accumulates gw, gb and returns dx
Tensor affine_backward(const Tensor& x, const Tensor& w, const Tensor& y, Tensor dy, bool act,
                       Tensor& gw, Tensor& gb) {
  if (act) {
    for (std::size_t i = 0; i < dy.v.size(); ++i) dy.v[i] *= 1.0 - y.v[i] * y.v[i];
  }
  for (int i = 0; i < x.rows; ++i)
    for (int k = 0; k < x.cols; ++k) {
      double xv = x.at(i, k);
      if (xv == 0.0) continue;
      for (int j = 0; j < w.cols; ++j) gw.at(k, j) += xv * dy.at(i, j);
    }
  for (int i = 0; i < dy.rows; ++i)
    for (int j = 0; j < dy.cols; ++j) gb.at(0, j) += dy.at(i, j);
  Tensor dx(x.rows, x.cols);
  for (int i = 0; i < x.rows; ++i)
    for (int j = 0; j < dy.cols; ++j) {
      double dv = dy.at(i, j);
      if (dv == 0.0) continue;
      for (int k = 0; k < x.cols; ++k) dx.at(i, k) += dv * w.at(k, j);
    }
  return dx;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {  // a (n x h) * b^T (h x m)
  Tensor y(a.rows, b.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < b.rows; ++j) {
      double acc = 0.0;
      for (int k = 0; k < a.cols; ++k) acc += a.at(i, k) * b.at(j, k);
      y.at(i, j) = acc;
    }
  return y;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  Tensor y(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int k = 0; k < a.cols; ++k) {
      double av = a.at(i, k);
      if (av == 0.0) continue;
      for (int j = 0; j < b.cols; ++j) y.at(i, j) += av * b.at(k, j);
    }
  return y;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {  // a^T (m x n) * b (n x p)
  Tensor y(a.cols, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int k = 0; k < a.cols; ++k) {
      double av = a.at(i, k);
      if (av == 0.0) continue;
      for (int j = 0; j < b.cols; ++j) y.at(k, j) += av * b.at(i, j);
    }
  return y;
}

Tensor features_matrix(const std::vector<StatementFeature>& rows) {
  Tensor t(static_cast<int>(rows.size()), kStatementFeatureWidth);
  for (int i = 0; i < t.rows; ++i)
    for (int j = 0; j < t.cols; ++j) t.at(i, j) = rows[i][j];
  return t;
}

Tensor blocks_matrix(const std::vector<DataflowBlockFeature>& rows) {
  Tensor t(static_cast<int>(rows.size()), kDataflowFeatureWidth);
  for (int i = 0; i < t.rows; ++i)
    for (int j = 0; j < t.cols; ++j) t.at(i, j) = rows[i][j];
  return t;
}

struct ForwardCache {
  Tensor stmt_in, z1, z2;
  Tensor block_in, embed;
  Tensor q, k, vv, probs, attn_out;
  Tensor concat;  // 1 x 2h
  Tensor g;       // 1 x h
  double score = 0.0;
  bool identity = false;
};

ForwardCache run_forward(const RankerParams& p, const HybridFeature& feat,
                         const ScoreOptions& opts) {
  if (feat.statements.empty() || feat.dataflow.empty())
    fail(err::kState, "feature must have at least one statement and one dataflow block");
  const int h = p.hidden;
  ForwardCache c;
  c.identity = opts.attention_identity;

  c.stmt_in = features_matrix(feat.statements);
  c.z1 = affine(c.stmt_in, p.stmt_w1, p.stmt_b1, true);
  c.z2 = affine(c.z1, p.stmt_w2, p.stmt_b2, true);

  c.block_in = blocks_matrix(feat.dataflow);
  c.embed = affine(c.block_in, p.embed_w, p.embed_b, true);

  const Tensor* pooled_src = &c.embed;
  if (!c.identity) {
    c.q = affine(c.embed, p.attn_wq, p.attn_bq, false);
    c.k = affine(c.embed, p.attn_wk, p.attn_bk, false);
    c.vv = affine(c.embed, p.attn_wv, p.attn_bv, false);
    Tensor logits = matmul_nt(c.q, c.k);
    double scale = 1.0 / std::sqrt(static_cast<double>(h));
    for (double& x : logits.v) x *= scale;
    c.probs = Tensor(logits.rows, logits.cols);
    for (int i = 0; i < logits.rows; ++i) {
      double mx = logits.at(i, 0);
      for (int j = 1; j < logits.cols; ++j) mx = std::max(mx, logits.at(i, j));
      double sum = 0.0;
      for (int j = 0; j < logits.cols; ++j) {
        double e = std::exp(logits.at(i, j) - mx);
        c.probs.at(i, j) = e;
        sum += e;
      }
      for (int j = 0; j < logits.cols; ++j) c.probs.at(i, j) /= sum;
    }
    c.attn_out = matmul(c.probs, c.vv);
    pooled_src = &c.attn_out;
  }

  c.concat = Tensor(1, 2 * h);
  for (int i = 0; i < c.z2.rows; ++i)
    for (int j = 0; j < h; ++j) c.concat.at(0, j) += c.z2.at(i, j);
  double inv_n = 1.0 / pooled_src->rows;
  for (int i = 0; i < pooled_src->rows; ++i)
    for (int j = 0; j < h; ++j) c.concat.at(0, h + j) += pooled_src->at(i, j) * inv_n;

  c.g = affine(c.concat, p.head_w1, p.head_b1, true);
  Tensor s = affine(c.g, p.head_w2, p.head_b2, false);
  c.score = s.at(0, 0);
  return c;
}

void run_backward(const RankerParams& p, const ForwardCache& c, double dscore,
                  RankerParams& g) {
  const int h = p.hidden;

  // head
  Tensor dg(1, h);
  for (int j = 0; j < h; ++j) {
    g.head_w2.at(j, 0) += c.g.at(0, j) * dscore;
    dg.at(0, j) = p.head_w2.at(j, 0) * dscore;
  }
  g.head_b2.at(0, 0) += dscore;
  Tensor dconcat = affine_backward(c.concat, p.head_w1, c.g, dg, true, g.head_w1, g.head_b1);

  // statement branch: each row of z2 receives dconcat[0:h]
  Tensor dz2(c.z2.rows, h);
  for (int i = 0; i < c.z2.rows; ++i)
    for (int j = 0; j < h; ++j) dz2.at(i, j) = dconcat.at(0, j);
  Tensor dz1 = affine_backward(c.z1, p.stmt_w2, c.z2, dz2, true, g.stmt_w2, g.stmt_b2);
  affine_backward(c.stmt_in, p.stmt_w1, c.z1, dz1, true, g.stmt_w1, g.stmt_b1);

  // dataflow branch: mean-pool spreads dconcat[h:2h]
  int n = c.identity ? c.embed.rows : c.attn_out.rows;
  double inv_n = 1.0 / n;
  Tensor dpool(n, h);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < h; ++j) dpool.at(i, j) = dconcat.at(0, h + j) * inv_n;

  Tensor dembed;
  if (c.identity) {
    dembed = std::move(dpool);
  } else {
    Tensor dprobs = matmul_nt(dpool, c.vv);           // n x n
    Tensor dv = matmul_tn(c.probs, dpool);            // n x h
    Tensor dlogits(n, n);
    for (int i = 0; i < n; ++i) {
      double dot = 0.0;
      for (int j = 0; j < n; ++j) dot += dprobs.at(i, j) * c.probs.at(i, j);
      for (int j = 0; j < n; ++j)
        dlogits.at(i, j) = c.probs.at(i, j) * (dprobs.at(i, j) - dot);
    }
    double scale = 1.0 / std::sqrt(static_cast<double>(h));
    for (double& x : dlogits.v) x *= scale;
    Tensor dq = matmul(dlogits, c.k);
    Tensor dk = matmul_tn(dlogits, c.q);
    dembed = affine_backward(c.embed, p.attn_wq, c.q, dq, false, g.attn_wq, g.attn_bq);
    Tensor dk_in = affine_backward(c.embed, p.attn_wk, c.k, dk, false, g.attn_wk, g.attn_bk);
    Tensor dv_in = affine_backward(c.embed, p.attn_wv, c.vv, dv, false, g.attn_wv, g.attn_bv);
    for (std::size_t i = 0; i < dembed.v.size(); ++i) dembed.v[i] += dk_in.v[i] + dv_in.v[i];
  }
  affine_backward(c.block_in, p.embed_w, c.embed, dembed, true, g.embed_w, g.embed_b);
}

}  // namespace

void internal::params_to_json(const RankerParams& params, nlohmann::ordered_json& j) {
  j["format_version"] = 1;
  j["hidden"] = params.hidden;
  nlohmann::ordered_json tensors;
  for_each_tensor(params, [&](const std::string& name, const Tensor& t) {
    nlohmann::ordered_json jt;
    jt["rows"] = t.rows;
    jt["cols"] = t.cols;
    jt["data"] = t.v;
    tensors[name] = std::move(jt);
  });
  j["tensors"] = std::move(tensors);
}

RankerParams internal::params_from_json(const nlohmann::ordered_json& j) {
  if (!j.contains("format_version") || j.at("format_version").get<int>() != 1)
    fail(err::kParse, "model file: unsupported format_version");
  RankerParams p;
  p.hidden = j.at("hidden").get<int>();
  if (p.hidden < 1) fail(err::kParse, "model file: hidden must be >= 1");
  RngStream dummy(1);
  RankerParams shape = init_params(p.hidden, dummy);
  p = zeros_like(shape);
  const auto& tensors = j.at("tensors");
  for_each_tensor(p, [&](const std::string& name, Tensor& t) {
    if (!tensors.contains(name)) fail(err::kParse, "model file: missing tensor " + name);
    const auto& jt = tensors.at(name);
    int rows = jt.at("rows").get<int>();
    int cols = jt.at("cols").get<int>();
    if (rows != t.rows || cols != t.cols)
      fail(err::kParse, "model file: tensor " + name + " has shape " + std::to_string(rows) +
                            "x" + std::to_string(cols) + ", expected " + std::to_string(t.rows) +
                            "x" + std::to_string(t.cols));
    auto data = jt.at("data").get<std::vector<double>>();
    if (data.size() != t.v.size()) fail(err::kParse, "model file: tensor " + name + " size");
    t.v = std::move(data);
  });
  return p;
}

RankerParams init_params(int hidden, RngStream& rng) {
  if (hidden < 1) fail(err::kState, "hidden width must be >= 1");
  RankerParams p;
  p.hidden = hidden;
  p.stmt_w1 = xavier(kStatementFeatureWidth, hidden, rng);
  p.stmt_b1 = Tensor(1, hidden);
  p.stmt_w2 = xavier(hidden, hidden, rng);
  p.stmt_b2 = Tensor(1, hidden);
  p.embed_w = xavier(kDataflowFeatureWidth, hidden, rng);
  p.embed_b = Tensor(1, hidden);
  p.attn_wq = xavier(hidden, hidden, rng);
  p.attn_bq = Tensor(1, hidden);
  p.attn_wk = xavier(hidden, hidden, rng);
  p.attn_bk = Tensor(1, hidden);
  p.attn_wv = xavier(hidden, hidden, rng);
  p.attn_bv = Tensor(1, hidden);
  p.head_w1 = xavier(2 * hidden, hidden, rng);
  p.head_b1 = Tensor(1, hidden);
  p.head_w2 = xavier(hidden, 1, rng);
  p.head_b2 = Tensor(1, 1);
  return p;
}

RankerParams zeros_like(const RankerParams& params) {
  RankerParams z = params;
  for_each_tensor(z, [](const std::string&, Tensor& t) {
    std::fill(t.v.begin(), t.v.end(), 0.0);
  });
  return z;
}

void for_each_tensor(RankerParams& p,
                     const std::function<void(const std::string&, Tensor&)>& fn) {
  fn("stmt_w1", p.stmt_w1);
  fn("stmt_b1", p.stmt_b1);
  fn("stmt_w2", p.stmt_w2);
  fn("stmt_b2", p.stmt_b2);
  fn("embed_w", p.embed_w);
  fn("embed_b", p.embed_b);
  fn("attn_wq", p.attn_wq);
  fn("attn_bq", p.attn_bq);
  fn("attn_wk", p.attn_wk);
  fn("attn_bk", p.attn_bk);
  fn("attn_wv", p.attn_wv);
  fn("attn_bv", p.attn_bv);
  fn("head_w1", p.head_w1);
  fn("head_b1", p.head_b1);
  fn("head_w2", p.head_w2);
  fn("head_b2", p.head_b2);
}

void for_each_tensor(const RankerParams& p,
                     const std::function<void(const std::string&, const Tensor&)>& fn) {
  for_each_tensor(const_cast<RankerParams&>(p),
                  [&](const std::string& name, Tensor& t) { fn(name, t); });
}

void check_same_shape(const RankerParams& a, const RankerParams& b) {
  if (a.hidden != b.hidden) fail(err::kState, "model width mismatch");
  std::vector<std::pair<int, int>> sa, sb;
  for_each_tensor(a, [&](const std::string&, const Tensor& t) { sa.emplace_back(t.rows, t.cols); });
  for_each_tensor(b, [&](const std::string&, const Tensor& t) { sb.emplace_back(t.rows, t.cols); });
  if (sa != sb) fail(err::kState, "model tensor shape mismatch");
}

double score(const RankerParams& params, const HybridFeature& feat, const ScoreOptions& opts) {
  g_forward_calls.fetch_add(1, std::memory_order_relaxed);
  return run_forward(params, feat, opts).score;
}

std::vector<double> score_batch(const RankerParams& params,
                                const std::vector<HybridFeature>& feats,
                                const ScoreOptions& opts, int threads) {
  std::vector<double> out(feats.size());
  parallel_for(feats.size(), threads, [&](std::size_t i) { out[i] = score(params, feats[i], opts); });
  return out;
}

double score_backward(const RankerParams& params, const HybridFeature& feat, double dscore,
                      RankerParams& grads, const ScoreOptions& opts) {
  g_forward_calls.fetch_add(1, std::memory_order_relaxed);
  ForwardCache cache = run_forward(params, feat, opts);
  run_backward(params, cache, dscore, grads);
  return cache.score;
}

uint64_t forward_calls() { return g_forward_calls.load(std::memory_order_relaxed); }
void reset_forward_calls() { g_forward_calls.store(0, std::memory_order_relaxed); }

RankLossResult lambda_rank_loss(const std::vector<double>& scores,
                                const std::vector<double>& latencies) {
  const std::size_t n = scores.size();
  if (n != latencies.size()) fail(err::kState, "rank loss: length mismatch");
  if (n < 2) fail(err::kState, "rank loss: need at least two items");
  double min_lat = latencies[0];
  for (double l : latencies) {
    if (!(l > 0.0)) fail(err::kState, "rank loss: latencies must be positive");
    min_lat = std::min(min_lat, l);
  }

  std::vector<double> gain(n);
  for (std::size_t i = 0; i < n; ++i)
    gain[i] = std::exp2(min_lat / latencies[i]) - 1.0;

  // positions under the current score ranking (desc, ties by index)
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  std::vector<double> discount(n);
  for (std::size_t pos = 0; pos < n; ++pos)
    discount[order[pos]] = 1.0 / log2d(static_cast<double>(pos) + 2.0);

  std::vector<double> ideal = gain;
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  double max_dcg = 0.0;
  for (std::size_t pos = 0; pos < n; ++pos)
    max_dcg += ideal[pos] / log2d(static_cast<double>(pos) + 2.0);

  RankLossResult r;
  r.grad.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!(latencies[i] < latencies[j])) continue;  // i is the faster item
      double w = std::abs(gain[i] - gain[j]) * std::abs(discount[i] - discount[j]) / max_dcg;
      if (w == 0.0) continue;
      double d = scores[i] - scores[j];
      r.loss += w * softplus(-d);
      double slope = w * sigmoid(-d);
      r.grad[i] -= slope;
      r.grad[j] += slope;
    }
  }
  return r;
}

namespace {

double dataset_loss(const RankerParams& params, const std::vector<TaskSamples>& dataset,
                    const ScoreOptions& opts) {
  double total = 0.0;
  for (const auto& task : dataset) {
    if (task.features.size() < 2) continue;
    std::vector<double> scores(task.features.size());
    for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = score(params, task.features[i], opts);
    total += lambda_rank_loss(scores, task.latencies).loss;
  }
  return total;
}

}  // namespace

TrainReport train(RankerParams& params, const std::vector<TaskSamples>& dataset,
                  const TrainConfig& cfg) {
  std::size_t items = 0;
  for (const auto& t : dataset) {
    if (t.features.size() != t.latencies.size())
      fail(err::kState, "train: features/latencies length mismatch in task " + t.task);
    items += t.features.size();
  }
  if (items < 2) fail(err::kState, "train: dataset needs at least two labeled schedules");
  if (cfg.epochs < 0) fail(err::kState, "train: epochs must be >= 0");

  TrainReport report;
  report.initial_loss = dataset_loss(params, dataset, cfg.score_opts);

  RngStream rng(derive_seed(cfg.seed, 0x7261696eULL));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (const auto& task : dataset) {
      std::size_t n = task.features.size();
      if (n < 2) continue;
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), 0);
      std::size_t take = n;
      if (cfg.batch > 0 && static_cast<std::size_t>(cfg.batch) < n) {
        take = static_cast<std::size_t>(cfg.batch);
        for (std::size_t i = 0; i < take; ++i) {
          std::size_t j = i + rng.uniform_index(n - i);
          std::swap(idx[i], idx[j]);
        }
      }
      std::vector<double> scores(take), lats(take);
      for (std::size_t i = 0; i < take; ++i) {
        scores[i] = score(params, task.features[idx[i]], cfg.score_opts);
        lats[i] = task.latencies[idx[i]];
      }
      RankLossResult rl = lambda_rank_loss(scores, lats);
      epoch_loss += rl.loss;
      if (cfg.lr == 0.0) continue;
      RankerParams grads = zeros_like(params);
      for (std::size_t i = 0; i < take; ++i) {
        if (rl.grad[i] == 0.0) continue;
        score_backward(params, task.features[idx[i]], rl.grad[i], grads, cfg.score_opts);
      }
      std::vector<Tensor*> pt, gt;
      for_each_tensor(params, [&](const std::string&, Tensor& t) { pt.push_back(&t); });
      for_each_tensor(grads, [&](const std::string&, Tensor& t) { gt.push_back(&t); });
      for (std::size_t t = 0; t < pt.size(); ++t)
        for (std::size_t i = 0; i < gt[t]->v.size(); ++i) pt[t]->v[i] -= cfg.lr * gt[t]->v[i];
    }
    report.epoch_losses.push_back(epoch_loss);
  }
  report.final_loss = dataset_loss(params, dataset, cfg.score_opts);
  return report;
}

std::vector<std::size_t> select_top(const std::vector<double>& scores,
                                    const std::vector<double>& draft_costs,
                                    const std::vector<char>& excluded, std::size_t b) {
  if (scores.size() != draft_costs.size() || scores.size() != excluded.size())
    fail(err::kState, "select_top: input lengths must match");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (!excluded[i]) idx.push_back(i);
  if (idx.size() < b)
    fail(err::kState, "select_top: requested " + std::to_string(b) + " but only " +
                          std::to_string(idx.size()) + " unmeasured candidates available");
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t c) {
    if (scores[a] != scores[c]) return scores[a] > scores[c];
    if (draft_costs[a] != draft_costs[c]) return draft_costs[a] < draft_costs[c];
    return a < c;
  });
  idx.resize(b);
  return idx;
}

std::string serialize_params(const RankerParams& params) {
  nlohmann::ordered_json j;
  internal::params_to_json(params, j);
  return j.dump() + "\n";
}

RankerParams parse_params(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const std::exception& e) {
    fail(err::kParse, std::string("model file parse failure: ") + e.what());
  }
  return internal::params_from_json(j);
}

void save_params(const RankerParams& params, const std::string& path) {
  write_file(path, serialize_params(params));
}

RankerParams load_params(const std::string& path) { return parse_params(read_file(path)); }

}  // namespace tiletune
