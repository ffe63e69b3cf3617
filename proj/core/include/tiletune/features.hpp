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
#ifndef TILETUNE_FEATURES_HPP_
#define TILETUNE_FEATURES_HPP_

#include <array>
#include <vector>

#include "tiletune/device.hpp"
#include "tiletune/draft.hpp"
#include "tiletune/schedule.hpp"

namespace tiletune {

inline constexpr int kStatementFeatureWidth = 24;
inline constexpr int kDataflowFeatureWidth = 23;

// Dataflow block vector layout (all counts in elements, logs are log1p):
//
//   1-6   one-hot flow direction: L2->L1, L1->L0, L0->compute, L0->L2,
//         L1->L2 (reserved), intra-L0
//   7-9   one-hot access type: read, write, read-write
//   10    log allocation at the destination level
//   11    log transfer volume (program-wide element moves)
//   12    log data reuse factor = element touches / distinct elements
//   13    log innermost access stride in the source tile (0 = revisit)
//   14    contiguity flag (L2-facing blocks: innermost run aligned to n_l2;
//         register blocks: stride == 1)
//   15    log compute density = fused ops per moved element
//   16    log total participating lanes (s4 * s6)
//   17    log per-lane inner vector footprint (product of v factors, rc for
//         reduction axes; cooperative share ceil(L1fp/s4) for L2->L1 blocks)
//   18    buffer rank / 8
//   19    loop depth of the movement / 16
//   20    reduction-carried flag
//   21    log unroll
//   22    log s7 of the parent statement
//   23    constant 1 (bias)
//
// Pure element-wise ops carry a single zero block with only the bias slot
// set.
using DataflowBlockFeature = std::array<double, kDataflowFeatureWidth>;

// Statement vector layout:
//
//   1-8   log s1..s8
//   9-15  penalties p_l0_m, log p_l0_c, p_l1_m, p_l1_c, alpha_l1, p_l2_c,
//         p_l2_m (the unbounded compute-density penalty is stored in log
//         scale, the rest raw in (0,1])
//   16    log flops of the op
//   17    log total L2 traffic (sum of s5 over statements)
//   18    log arithmetic intensity s8 / max(s5, 1)
//   19    lanes per block relative to capacity: s4 / (pu_l1 * n_l1)
//   20    log blocks relative to parallel units: log(1 + s6 / pu_l2)
//   21    log unroll
//   22    fused element-wise stage count
//   23    statement kind index / 4
//   24    constant 1 (bias)
using StatementFeature = std::array<double, kStatementFeatureWidth>;

/// Statement vectors plus the temporal sequence of data-movement blocks, in
/// statement traversal order. Input to the learned ranking model.
struct HybridFeature {
  std::vector<StatementFeature> statements;
  std::vector<DataflowBlockFeature> dataflow;
};

/// Block construction: each load and the store contribute one block; the
/// compute statement contributes one block per input operand plus one
/// intra-L0 accumulation block.
HybridFeature extract_features(const Sketch& sketch, const Schedule& sched,
                               const DeviceSpec& device);

}  // namespace tiletune

#endif  // TILETUNE_FEATURES_HPP_
