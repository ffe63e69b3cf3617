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
#include "tiletune/draft.hpp"

#include <algorithm>
#include <unordered_map>

#include "tiles_internal.hpp"

namespace tiletune {

using internal::Level;
using internal::TileTable;

const char* statement_kind_name(StatementKind kind) {
  switch (kind) {
    case StatementKind::kLoadL2ToL1:
      return "load_l2_to_l1";
    case StatementKind::kLoadL1ToL0:
      return "load_l1_to_l0";
    case StatementKind::kComputeL0:
      return "compute_l0";
    case StatementKind::kStoreL0ToL2:
      return "store_l0_to_l2";
  }
  return "?";
}

std::vector<StatementSymbols> extract_symbols(const Sketch& sketch, const Schedule& sched) {
  const TensorOpSpec& op = sketch.op;
  TileTable tiles = internal::build_tiles(sketch, sched);

  // schedule-wide symbols
  int64_t s1 = tiles.footprint(op.output_buffer(), Level::kL0);
  int64_t s3 = 0;
  for (const auto& buf : op.buffers) {
    if (buf.io == BufferIo::kInput) {
      s1 += tiles.footprint(buf, Level::kL0);
      s3 += tiles.footprint(buf, Level::kL1);
    }
  }
  int64_t s2 = tiles.reduction_total;
  for (const auto& slot : sketch.spatial) s2 *= tiles.at(slot.axis).l0;
  int64_t s4 = tiles.lanes_per_block;
  int64_t s6 = tiles.blocks;

  int64_t output_size = 1;
  for (const auto& a : op.spatial_axes) output_size *= a.extent;

  auto base = [&](StatementKind kind, int buffer_index) {
    StatementSymbols ss;
    ss.stmt = {kind, buffer_index};
    ss.symbols.s1 = s1;
    ss.symbols.s2 = s2;
    ss.symbols.s3 = s3;
    ss.symbols.s4 = s4;
    ss.symbols.s6 = s6;
    return ss;
  };

  std::vector<StatementSymbols> out;
  for (int i = 0; i < static_cast<int>(op.buffers.size()); ++i) {
    const auto& buf = op.buffers[i];
    if (buf.io != BufferIo::kInput) continue;
    StatementSymbols ss = base(StatementKind::kLoadL2ToL1, i);
    ss.symbols.s5 = tiles.footprint(buf, Level::kL1) * s6 * tiles.prod_ra;
    ss.symbols.s7 = tiles.tile_extent(buf.axes.back(), Level::kL1);
    out.push_back(ss);
  }
  for (int i = 0; i < static_cast<int>(op.buffers.size()); ++i) {
    const auto& buf = op.buffers[i];
    if (buf.io != BufferIo::kInput) continue;
    StatementSymbols ss = base(StatementKind::kLoadL1ToL0, i);
    ss.symbols.s7 = tiles.tile_extent(buf.axes.back(), Level::kL0);
    out.push_back(ss);
  }
  {
    StatementSymbols ss = base(StatementKind::kComputeL0, -1);
    ss.symbols.s8 = flops_of(op);
    out.push_back(ss);
  }
  {
    const BufferSpec& buf = op.output_buffer();
    int index = 0;
    for (int i = 0; i < static_cast<int>(op.buffers.size()); ++i)
      if (op.buffers[i].io == BufferIo::kOutput) index = i;
    StatementSymbols ss = base(StatementKind::kStoreL0ToL2, index);
    ss.symbols.s5 = output_size;
    ss.symbols.s7 = tiles.tile_extent(buf.axes.back(), Level::kL0);
    out.push_back(ss);
  }
  return out;
}

PenaltySet compute_penalties(const SymbolSet& sym, const DeviceSpec& device) {
  auto ceil_div = [](int64_t a, int64_t b) { return (a + b - 1) / b; };
  PenaltySet p;
  if (sym.s1 > 0) {
    p.p_l0_m = std::min(static_cast<double>(device.m_l0) / static_cast<double>(sym.s1), 1.0);
    p.p_l0_c = 1.0 + static_cast<double>(sym.s2) / static_cast<double>(sym.s1);
  }
  if (sym.s3 > 0)
    p.p_l1_m = std::min(static_cast<double>(device.m_l1) / static_cast<double>(sym.s3), 1.0);
  int64_t sch_l1 = ceil_div(sym.s4, device.n_l1);
  p.p_l1_c = static_cast<double>(sch_l1) /
             static_cast<double>(ceil_div(sch_l1, device.pu_l1) * device.pu_l1);
  p.alpha_l1 = static_cast<double>(sym.s4) / static_cast<double>(sch_l1 * device.n_l1);
  p.p_l2_c = static_cast<double>(sym.s6) /
             static_cast<double>(ceil_div(sym.s6, device.pu_l2) * device.pu_l2);
  if (sym.s7 > 0)
    p.p_l2_m = static_cast<double>(sym.s7) /
               static_cast<double>(ceil_div(sym.s7, device.n_l2) * device.n_l2);
  return p;
}

DraftCost draft_cost(const Sketch& sketch, const Schedule& sched, const DeviceSpec& device,
                     const PenaltyToggles& toggles) {
  DraftCost cost;
  for (const auto& ss : extract_symbols(sketch, sched)) {
    PenaltySet p = compute_penalties(ss.symbols, device);
    if (!toggles.compute) {
      p.p_l0_c = 1.0;
      p.p_l1_c = 1.0;
      p.alpha_l1 = 1.0;
      p.p_l2_c = 1.0;
    }
    if (!toggles.memory) {
      p.p_l0_m = 1.0;
      p.p_l1_m = 1.0;
      p.p_l2_m = 1.0;
    }
    DraftCost::StatementCost sc;
    sc.u_p = device.t_p * p.p_l0_c * p.p_l1_c * p.alpha_l1 * p.p_l2_c;
    sc.u_m = device.t_m * p.p_l0_m * p.p_l1_m * p.p_l2_m;
    if (ss.symbols.s8 > 0) sc.l_c = static_cast<double>(ss.symbols.s8) / sc.u_p;
    if (ss.symbols.s5 > 0) sc.l_m = static_cast<double>(ss.symbols.s5) / sc.u_m;
    cost.total += sc.l_c + sc.l_m;
    cost.per_statement.push_back(sc);
  }
  return cost;
}

ExploreResult explore(const TensorOpSpec& op, const DeviceSpec& device, int n_steps,
                      int draft_size, int pop_size, RngStream& rng,
                      const PenaltyToggles& toggles, int threads) {
  if (n_steps < 1) fail(err::kState, "explore: n_steps must be >= 1");
  if (draft_size < 1) fail(err::kState, "explore: draft_size must be >= 1");
  if (pop_size < 2) fail(err::kState, "explore: pop_size must be >= 2");

  ExploreResult result;
  result.sketch = generate_sketch(op, /*elementwise_fallback=*/true);

  struct Entry {
    Schedule sched;
    double cost;
    uint64_t discovered;
  };
  std::unordered_map<std::string, Entry> pool;
  uint64_t discovery = 0;

  auto trim = [&]() {
    if (pool.size() <= static_cast<std::size_t>(draft_size)) return;
    std::vector<const Entry*> entries;
    entries.reserve(pool.size());
    for (const auto& [key, e] : pool) entries.push_back(&e);
    std::nth_element(entries.begin(), entries.begin() + draft_size, entries.end(),
                     [](const Entry* a, const Entry* b) {
                       if (a->cost != b->cost) return a->cost < b->cost;
                       return a->discovered < b->discovered;
                     });
    std::unordered_map<std::string, Entry> kept;
    kept.reserve(static_cast<std::size_t>(draft_size) * 2);
    for (int i = 0; i < draft_size; ++i) {
      const Entry* e = entries[i];
      kept.emplace(schedule_key(result.sketch, e->sched), *e);
    }
    pool = std::move(kept);
  };

  std::vector<Schedule> population = random_init(result.sketch, pop_size, rng);
  std::vector<double> costs(population.size());
  for (int step = 0; step < n_steps; ++step) {
    parallel_for(population.size(), threads, [&](std::size_t i) {
      costs[i] = draft_cost(result.sketch, population[i], device, toggles).total;
    });
    result.evaluations += population.size();
    for (std::size_t i = 0; i < population.size(); ++i) {
      std::string key = schedule_key(result.sketch, population[i]);
      if (!pool.count(key)) pool.emplace(std::move(key), Entry{population[i], costs[i], discovery++});
    }
    trim();
    if (step + 1 < n_steps)
      population = mutate(population, result.sketch, costs, rng);
  }

  std::vector<const Entry*> entries;
  entries.reserve(pool.size());
  for (const auto& [key, e] : pool) entries.push_back(&e);
  std::sort(entries.begin(), entries.end(), [](const Entry* a, const Entry* b) {
    if (a->cost != b->cost) return a->cost < b->cost;
    return a->discovered < b->discovered;
  });
  for (const Entry* e : entries) {
    result.drafted.push_back(e->sched);
    result.draft_costs.push_back(e->cost);
  }
  return result;
}

}  // namespace tiletune
