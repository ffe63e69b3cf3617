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
#ifndef TILETUNE_SCHEDULE_HPP_
#define TILETUNE_SCHEDULE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "tiletune/common.hpp"
#include "tiletune/workload.hpp"

namespace tiletune {

/// Multi-level tiling template for one operator.
///
/// Each spatial axis splits four ways (b, t, o, v): block, thread, outer
/// register and inner register tile. Each reduction axis splits three ways
/// (ra, rb, rc): outer step, L1-staged tile, innermost slice. Fused
/// element-wise stages attach to the register-level output and get no splits
/// of their own. Element-wise operators take a degenerate template whose
/// spatial slots admit only (b, t, 1, 1).
struct Sketch {
  TensorOpSpec op;
  struct SpatialSlot {
    std::string axis;
    int64_t extent = 1;
    int arity = 4;  // 4 = (b,t,o,v); 2 = degenerate (b,t) with o=v=1
  };
  struct ReductionSlot {
    std::string axis;
    int64_t extent = 1;
  };
  std::vector<SpatialSlot> spatial;
  std::vector<ReductionSlot> reduction;
  std::vector<int64_t> unroll_choices;
};

/// Concrete tiling-factor assignment under a sketch. spatial_factors[i] is
/// the (b, t, o, v) tuple of sketch.spatial[i]; reduction_factors[i] the
/// (ra, rb, rc) tuple of sketch.reduction[i]. Factor products equal the axis
/// extents.
struct Schedule {
  std::vector<std::vector<int64_t>> spatial_factors;    // each of size 4
  std::vector<std::vector<int64_t>> reduction_factors;  // each of size 3
  int64_t unroll = 1;
};

inline constexpr int64_t kDefaultUnrollChoices[] = {1, 4, 16};

/// Builds the tiling sketch. Element-wise ops are rejected unless
/// elementwise_fallback is set, in which case the degenerate (b, t) template
/// is produced.
Sketch generate_sketch(const TensorOpSpec& op, bool elementwise_fallback = false);

/// n schedules with every factor tuple drawn uniformly from the exact ordered
/// factorizations of its axis extent, unroll uniform over unroll_choices.
std::vector<Schedule> random_init(const Sketch& sketch, int64_t n, RngStream& rng);

/// Exact number of schedules the sketch admits (saturating at uint64 max).
uint64_t space_size(const Sketch& sketch);

/// Full Cartesian product of ordered factorizations and unroll choices.
/// Order: per-axis factorization lists sorted lexicographically; the product
/// iterates spatial axes outermost to innermost, then reduction axes, with
/// unroll innermost. Errors if the space exceeds cap.
std::vector<Schedule> enumerate_all(const Sketch& sketch, uint64_t cap);

/// One GA generation. Parents are chosen fitness-proportionally with fitness
/// 1/(cost + 1e-12); each child either moves one prime factor between two
/// positions of one axis tuple or resamples the unroll value. Slot 0 of the
/// result is the unchanged best parent (elitism).
std::vector<Schedule> mutate(const std::vector<Schedule>& population, const Sketch& sketch,
                             const std::vector<double>& costs, RngStream& rng);

void validate_schedule(const Sketch& sketch, const Schedule& sched);

/// Canonical identity string, e.g. "m:4,8,2,2;k:4,8,4;u:4". Used for
/// deduplication and as the serialized form inside tuning records.
std::string schedule_key(const Sketch& sketch, const Schedule& sched);

/// Inverse of schedule_key for re-reading serialized records.
Schedule schedule_from_key(const Sketch& sketch, const std::string& key);

// -- factorization helpers (exposed for tests and enumeration oracles) --

/// Prime factorization as (prime, exponent) pairs, primes ascending.
std::vector<std::pair<int64_t, int>> prime_factorize(int64_t n);

/// Number of ordered k-way factorizations of n (saturating at uint64 max).
uint64_t count_ordered_factorizations(int64_t n, int k);

/// All ordered k-way factorizations of n, sorted lexicographically.
std::vector<std::vector<int64_t>> ordered_factorizations(int64_t n, int k);

/// One uniform draw from the ordered k-way factorizations of n.
std::vector<int64_t> sample_factorization(int64_t n, int k, RngStream& rng);

}  // namespace tiletune

#endif  // TILETUNE_SCHEDULE_HPP_
