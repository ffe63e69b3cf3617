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
#include "tiletune/schedule.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

namespace tiletune {

namespace {

constexpr uint64_t kU64Max = std::numeric_limits<uint64_t>::max();

uint64_t sat_mul(uint64_t a, uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > kU64Max / b) return kU64Max;
  return a * b;
}

/// C(n, k) saturating at uint64 max.
uint64_t binomial(int64_t n, int64_t k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (int64_t i = 1; i <= k; ++i) {
    r = r * static_cast<unsigned __int128>(n - k + i) / static_cast<unsigned __int128>(i);
    if (r > kU64Max) return kU64Max;
  }
  return static_cast<uint64_t>(r);
}

/// Uniform composition of total into k ordered non-negative parts, by
/// unranking a uniform index.
std::vector<int> sample_composition(int total, int k, RngStream& rng) {
  std::vector<int> parts(k, 0);
  uint64_t count = binomial(total + k - 1, k - 1);
  uint64_t rank = rng.uniform_index(count);
  int remaining = total;
  for (int slot = 0; slot < k - 1; ++slot) {
    int slots_left = k - slot - 1;
    for (int v = 0; v <= remaining; ++v) {
      uint64_t with_v = binomial(remaining - v + slots_left - 1, slots_left - 1);
      if (rank < with_v) {
        parts[slot] = v;
        remaining -= v;
        break;
      }
      rank -= with_v;
    }
  }
  parts[k - 1] = remaining;
  return parts;
}

void compositions_rec(int total, int k, std::vector<int>& cur,
                      std::vector<std::vector<int>>& out) {
  if (k == 1) {
    cur.push_back(total);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int v = 0; v <= total; ++v) {
    cur.push_back(v);
    compositions_rec(total - v, k - 1, cur, out);
    cur.pop_back();
  }
}

int64_t ipow(int64_t base, int exp) {
  int64_t r = 1;
  while (exp-- > 0) r *= base;
  return r;
}

}  // namespace

std::vector<std::pair<int64_t, int>> prime_factorize(int64_t n) {
  if (n < 1) fail(err::kState, "prime_factorize: n must be >= 1");
  std::vector<std::pair<int64_t, int>> out;
  for (int64_t p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      int e = 0;
      while (n % p == 0) {
        n /= p;
        ++e;
      }
      out.emplace_back(p, e);
    }
  }
  if (n > 1) out.emplace_back(n, 1);
  return out;
}

uint64_t count_ordered_factorizations(int64_t n, int k) {
  uint64_t count = 1;
  for (const auto& [p, e] : prime_factorize(n)) {
    (void)p;
    count = sat_mul(count, binomial(e + k - 1, k - 1));
  }
  return count;
}

std::vector<std::vector<int64_t>> ordered_factorizations(int64_t n, int k) {
  auto primes = prime_factorize(n);
  std::vector<std::vector<int64_t>> tuples{std::vector<int64_t>(k, 1)};
  for (const auto& [p, e] : primes) {
    std::vector<std::vector<int>> comps;
    std::vector<int> cur;
    compositions_rec(e, k, cur, comps);
    std::vector<std::vector<int64_t>> next;
    next.reserve(tuples.size() * comps.size());
    for (const auto& t : tuples) {
      for (const auto& c : comps) {
        std::vector<int64_t> merged = t;
        for (int i = 0; i < k; ++i) merged[i] *= ipow(p, c[i]);
        next.push_back(std::move(merged));
      }
    }
    tuples = std::move(next);
  }
  std::sort(tuples.begin(), tuples.end());
  return tuples;
}

std::vector<int64_t> sample_factorization(int64_t n, int k, RngStream& rng) {
  std::vector<int64_t> tuple(k, 1);
  for (const auto& [p, e] : prime_factorize(n)) {
    auto comp = sample_composition(e, k, rng);
    for (int i = 0; i < k; ++i) tuple[i] *= ipow(p, comp[i]);
  }
  return tuple;
}

Sketch generate_sketch(const TensorOpSpec& op, bool elementwise_fallback) {
  validate_op(op);
  Sketch sk;
  sk.op = op;
  sk.unroll_choices.assign(std::begin(kDefaultUnrollChoices), std::end(kDefaultUnrollChoices));
  if (op.kind == OpKind::kElementwise) {
    if (!elementwise_fallback)
      fail(err::kValidate, "elementwise ops take the trivial sketch");
    for (const auto& a : op.spatial_axes) sk.spatial.push_back({a.name, a.extent, 2});
    return sk;
  }
  for (const auto& a : op.spatial_axes) sk.spatial.push_back({a.name, a.extent, 4});
  for (const auto& a : op.reduction_axes) sk.reduction.push_back({a.name, a.extent});
  return sk;
}

std::vector<Schedule> random_init(const Sketch& sketch, int64_t n, RngStream& rng) {
  if (n < 1) fail(err::kState, "random_init: n must be >= 1");
  std::vector<Schedule> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    Schedule s;
    for (const auto& slot : sketch.spatial) {
      if (slot.arity == 4) {
        s.spatial_factors.push_back(sample_factorization(slot.extent, 4, rng));
      } else {
        auto bt = sample_factorization(slot.extent, 2, rng);
        s.spatial_factors.push_back({bt[0], bt[1], 1, 1});
      }
    }
    for (const auto& slot : sketch.reduction)
      s.reduction_factors.push_back(sample_factorization(slot.extent, 3, rng));
    s.unroll = sketch.unroll_choices[rng.uniform_index(sketch.unroll_choices.size())];
    out.push_back(std::move(s));
  }
  return out;
}

uint64_t space_size(const Sketch& sketch) {
  uint64_t size = 1;
  for (const auto& slot : sketch.spatial)
    size = sat_mul(size, count_ordered_factorizations(slot.extent, slot.arity));
  for (const auto& slot : sketch.reduction)
    size = sat_mul(size, count_ordered_factorizations(slot.extent, 3));
  return sat_mul(size, sketch.unroll_choices.size());
}

std::vector<Schedule> enumerate_all(const Sketch& sketch, uint64_t cap) {
  if (cap < 1) fail(err::kState, "enumerate_all: cap must be >= 1");
  uint64_t size = space_size(sketch);
  if (size > cap)
    fail(err::kState, "space size " + std::to_string(size) + " exceeds cap " +
                          std::to_string(cap));

  std::vector<std::vector<std::vector<int64_t>>> axis_lists;
  for (const auto& slot : sketch.spatial) {
    auto tuples = ordered_factorizations(slot.extent, slot.arity);
    if (slot.arity == 2)
      for (auto& t : tuples) t.insert(t.end(), {1, 1});
    axis_lists.push_back(std::move(tuples));
  }
  for (const auto& slot : sketch.reduction)
    axis_lists.push_back(ordered_factorizations(slot.extent, 3));

  std::vector<Schedule> out;
  out.reserve(static_cast<std::size_t>(size));
  std::vector<std::size_t> idx(axis_lists.size(), 0);
  std::size_t n_spatial = sketch.spatial.size();
  while (true) {
    for (int64_t u : sketch.unroll_choices) {
      Schedule s;
      for (std::size_t a = 0; a < axis_lists.size(); ++a) {
        if (a < n_spatial)
          s.spatial_factors.push_back(axis_lists[a][idx[a]]);
        else
          s.reduction_factors.push_back(axis_lists[a][idx[a]]);
      }
      s.unroll = u;
      out.push_back(std::move(s));
    }
    // odometer increment, last axis fastest
    std::size_t a = axis_lists.size();
    while (a > 0) {
      --a;
      if (++idx[a] < axis_lists[a].size()) break;
      idx[a] = 0;
      if (a == 0) return out;
    }
    if (axis_lists.empty()) return out;
  }
}

void validate_schedule(const Sketch& sketch, const Schedule& sched) {
  if (sched.spatial_factors.size() != sketch.spatial.size() ||
      sched.reduction_factors.size() != sketch.reduction.size())
    fail(err::kValidate, "schedule does not match sketch axis structure");
  for (std::size_t i = 0; i < sketch.spatial.size(); ++i) {
    const auto& f = sched.spatial_factors[i];
    if (f.size() != 4) fail(err::kValidate, "spatial factor tuple must have 4 entries");
    int64_t prod = 1;
    for (int64_t v : f) {
      if (v < 1) fail(err::kValidate, "factors must be >= 1");
      prod *= v;
    }
    if (prod != sketch.spatial[i].extent)
      fail(err::kValidate, "axis " + sketch.spatial[i].axis + ": factor product " +
                               std::to_string(prod) + " != extent " +
                               std::to_string(sketch.spatial[i].extent));
    if (sketch.spatial[i].arity == 2 && (f[2] != 1 || f[3] != 1))
      fail(err::kValidate,
           "axis " + sketch.spatial[i].axis + ": degenerate slot admits only (b,t,1,1)");
  }
  for (std::size_t i = 0; i < sketch.reduction.size(); ++i) {
    const auto& f = sched.reduction_factors[i];
    if (f.size() != 3) fail(err::kValidate, "reduction factor tuple must have 3 entries");
    int64_t prod = 1;
    for (int64_t v : f) {
      if (v < 1) fail(err::kValidate, "factors must be >= 1");
      prod *= v;
    }
    if (prod != sketch.reduction[i].extent)
      fail(err::kValidate, "axis " + sketch.reduction[i].axis + ": factor product " +
                               std::to_string(prod) + " != extent " +
                               std::to_string(sketch.reduction[i].extent));
  }
  if (std::find(sketch.unroll_choices.begin(), sketch.unroll_choices.end(), sched.unroll) ==
      sketch.unroll_choices.end())
    fail(err::kValidate, "unroll " + std::to_string(sched.unroll) + " not a permitted choice");
}

std::string schedule_key(const Sketch& sketch, const Schedule& sched) {
  std::ostringstream out;
  for (std::size_t i = 0; i < sketch.spatial.size(); ++i) {
    out << sketch.spatial[i].axis << ':';
    const auto& f = sched.spatial_factors[i];
    for (std::size_t j = 0; j < f.size(); ++j) out << (j ? "," : "") << f[j];
    out << ';';
  }
  for (std::size_t i = 0; i < sketch.reduction.size(); ++i) {
    out << sketch.reduction[i].axis << ':';
    const auto& f = sched.reduction_factors[i];
    for (std::size_t j = 0; j < f.size(); ++j) out << (j ? "," : "") << f[j];
    out << ';';
  }
  out << "u:" << sched.unroll;
  return out.str();
}

Schedule schedule_from_key(const Sketch& sketch, const std::string& key) {
  Schedule s;
  std::istringstream in(key);
  std::string part;
  std::vector<std::pair<std::string, std::vector<int64_t>>> parts;
  int64_t unroll = 0;
  bool have_unroll = false;
  while (std::getline(in, part, ';')) {
    std::size_t colon = part.find(':');
    if (colon == std::string::npos) fail(err::kParse, "bad schedule key segment: " + part);
    std::string axis = part.substr(0, colon);
    std::string rest = part.substr(colon + 1);
    if (axis == "u") {
      unroll = std::stoll(rest);
      have_unroll = true;
      continue;
    }
    std::vector<int64_t> factors;
    std::istringstream fin(rest);
    std::string tok;
    while (std::getline(fin, tok, ',')) factors.push_back(std::stoll(tok));
    parts.emplace_back(axis, std::move(factors));
  }
  if (!have_unroll) fail(err::kParse, "schedule key missing unroll segment");
  if (parts.size() != sketch.spatial.size() + sketch.reduction.size())
    fail(err::kParse, "schedule key axis count does not match sketch");
  for (std::size_t i = 0; i < sketch.spatial.size(); ++i) {
    if (parts[i].first != sketch.spatial[i].axis)
      fail(err::kParse, "schedule key axis order mismatch at " + parts[i].first);
    s.spatial_factors.push_back(parts[i].second);
  }
  for (std::size_t i = 0; i < sketch.reduction.size(); ++i) {
    const auto& p = parts[sketch.spatial.size() + i];
    if (p.first != sketch.reduction[i].axis)
      fail(err::kParse, "schedule key axis order mismatch at " + p.first);
    s.reduction_factors.push_back(p.second);
  }
  s.unroll = unroll;
  validate_schedule(sketch, s);
  return s;
}

std::vector<Schedule> mutate(const std::vector<Schedule>& population, const Sketch& sketch,
                             const std::vector<double>& costs, RngStream& rng) {
  if (population.empty()) fail(err::kState, "mutate: population must be non-empty");
  if (population.size() != costs.size())
    fail(err::kState, "mutate: costs must align 1:1 with population");

  constexpr double kEps = 1e-12;
  std::vector<double> cumulative(population.size());
  double total = 0.0;
  for (std::size_t i = 0; i < population.size(); ++i) {
    total += 1.0 / (costs[i] + kEps);
    cumulative[i] = total;
  }
  auto pick_parent = [&]() -> const Schedule& {
    double r = rng.uniform_real() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    std::size_t i = std::min<std::size_t>(it - cumulative.begin(), population.size() - 1);
    return population[i];
  };

  std::size_t best = 0;
  for (std::size_t i = 1; i < population.size(); ++i)
    if (costs[i] < costs[best]) best = i;

  std::size_t n_spatial = sketch.spatial.size();
  std::size_t n_axes = n_spatial + sketch.reduction.size();

  std::vector<Schedule> out;
  out.reserve(population.size());
  out.push_back(population[best]);  // elite
  while (out.size() < population.size()) {
    Schedule child = pick_parent();
    std::size_t slot = rng.uniform_index(n_axes + 1);
    if (slot == n_axes) {
      child.unroll = sketch.unroll_choices[rng.uniform_index(sketch.unroll_choices.size())];
    } else {
      std::vector<int64_t>& f = slot < n_spatial
                                    ? child.spatial_factors[slot]
                                    : child.reduction_factors[slot - n_spatial];
      int arity = slot < n_spatial ? sketch.spatial[slot].arity : 3;
      // positions holding a movable prime, weighted by prime multiplicity
      std::vector<std::pair<int, int64_t>> moves;  // (position, prime)
      for (int i = 0; i < arity; ++i)
        for (const auto& [p, e] : prime_factorize(f[i]))
          for (int rep = 0; rep < e; ++rep) moves.emplace_back(i, p);
      if (!moves.empty() && arity > 1) {
        auto [from, prime] = moves[rng.uniform_index(moves.size())];
        int to = static_cast<int>(rng.uniform_index(arity - 1));
        if (to >= from) ++to;
        f[from] /= prime;
        f[to] *= prime;
      }
    }
    out.push_back(std::move(child));
  }
  return out;
}

}  // namespace tiletune
