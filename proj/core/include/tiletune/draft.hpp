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
#ifndef TILETUNE_DRAFT_HPP_
#define TILETUNE_DRAFT_HPP_

#include <cstdint>
#include <vector>

#include "tiletune/common.hpp"
#include "tiletune/device.hpp"
#include "tiletune/schedule.hpp"

namespace tiletune {

// The draft analyzer estimates a schedule's latency from per-statement
// hardware symbols, without executing anything. Per-buffer tile footprints
// follow one rule: the footprint of buffer B at level L is the product over
// B's axes of the axis tile extent at L, where
//
//   spatial axes:    L0 = o*v      L1 = t*o*v     L2 = extent
//   reduction axes:  L0 = 1        L1 = rb*rc     L2 = extent

enum class StatementKind { kLoadL2ToL1, kLoadL1ToL0, kComputeL0, kStoreL0ToL2 };

const char* statement_kind_name(StatementKind kind);

/// One innermost statement of the tiled program. A tiled op has one
/// load_l2_to_l1 and one load_l1_to_l0 per input buffer, one compute_l0 and
/// one store_l0_to_l2, traversed in that order (loads in buffer order).
struct StatementDesc {
  StatementKind kind;
  int buffer_index = -1;  // into op.buffers; -1 for compute_l0
};

/// Hardware-aware symbols of one statement. s1..s4 and s6 are schedule-wide
/// allocation/parallelism quantities and repeat across statements; s5, s7 and
/// s8 are statement-specific.
struct SymbolSet {
  int64_t s1 = 0;  // L0 allocation per lane (elements)
  int64_t s2 = 0;  // L0 compute count per lane (fused ops)
  int64_t s3 = 0;  // L1 allocation per block (elements)
  int64_t s4 = 0;  // lanes per block
  int64_t s5 = 0;  // L2 memory footprint of this statement (elements)
  int64_t s6 = 0;  // blocks at L2
  int64_t s7 = 0;  // innermost transfer extent (elements)
  int64_t s8 = 0;  // L2 compute count (fused ops)
};

struct StatementSymbols {
  StatementDesc stmt;
  SymbolSet symbols;
};

/// Dimensionless utilization penalties. All memory penalties and the
/// scheduling terms lie in (0, 1]; p_l0_c >= 1 rewards compute-dense
/// register tiles.
struct PenaltySet {
  double p_l0_m = 1.0;
  double p_l0_c = 1.0;
  double p_l1_m = 1.0;
  double p_l1_c = 1.0;
  double alpha_l1 = 1.0;
  double p_l2_c = 1.0;
  double p_l2_m = 1.0;
};

/// Ablation switches. Disabling the compute side forces p_l0_c, p_l1_c,
/// alpha_l1 and p_l2_c to 1; disabling the memory side forces p_l0_m, p_l1_m
/// and p_l2_m to 1.
struct PenaltyToggles {
  bool compute = true;
  bool memory = true;
};

struct DraftCost {
  struct StatementCost {
    double l_c = 0.0;  // compute latency (s)
    double l_m = 0.0;  // memory latency (s)
    double u_p = 0.0;  // utilized compute rate (fused ops/s)
    double u_m = 0.0;  // utilized bandwidth (elements/s)
  };
  std::vector<StatementCost> per_statement;
  double total = 0.0;  // sum of all l_c + l_m
};

/// Per-statement symbol extraction under the footprint rule above.
/// s5 of a load_l2_to_l1 of B is L1fp(B) * s6 * prod(ra); s5 of the store is
/// the full output size. s7 is the moved tile's extent along the buffer's
/// last axis at the transfer's finer level (L1 for L2<->L1 moves, L0
/// otherwise); the compute statement has s7 = 0.
std::vector<StatementSymbols> extract_symbols(const Sketch& sketch, const Schedule& sched);

/// p_l0_m = min(m_l0/s1, 1)           p_l0_c = 1 + s2/s1
/// p_l1_m = min(m_l1/s3, 1)           sch_l1 = ceil(s4/n_l1)
/// p_l1_c = sch_l1 / (ceil(sch_l1/pu_l1) * pu_l1)
/// alpha_l1 = s4 / (sch_l1 * n_l1)
/// p_l2_c = s6 / (ceil(s6/pu_l2) * pu_l2)
/// p_l2_m = s7 / (ceil(s7/n_l2) * n_l2)
/// Degenerate symbols (s1, s3 or s7 of 0) leave the affected penalties at 1.
PenaltySet compute_penalties(const SymbolSet& sym, const DeviceSpec& device);

/// Per statement: U_p = t_p * p_l0_c * p_l1_c * alpha_l1 * p_l2_c and
/// U_m = t_m * p_l0_m * p_l1_m * p_l2_m; the statement contributes
/// s8/U_p + s5/U_m, with zero numerators contributing exactly zero.
DraftCost draft_cost(const Sketch& sketch, const Schedule& sched, const DeviceSpec& device,
                     const PenaltyToggles& toggles = {});

struct ExploreResult {
  Sketch sketch;
  std::vector<Schedule> drafted;     // ascending draft cost
  std::vector<double> draft_costs;   // aligned with drafted
  uint64_t evaluations = 0;          // draft-model evaluations performed
};

/// GA search over the sketch space guided by the draft cost. Each step
/// evaluates the population, merges it into the drafted set (keeping the
/// draft_size lowest-cost unique schedules, ties by first discovery), then
/// mutates. Deterministic for a given rng seed and any thread count.
ExploreResult explore(const TensorOpSpec& op, const DeviceSpec& device, int n_steps,
                      int draft_size, int pop_size, RngStream& rng,
                      const PenaltyToggles& toggles = {}, int threads = 1);

}  // namespace tiletune

#endif  // TILETUNE_DRAFT_HPP_
