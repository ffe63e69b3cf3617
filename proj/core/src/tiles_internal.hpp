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
#ifndef TILETUNE_SRC_TILES_INTERNAL_HPP_
#define TILETUNE_SRC_TILES_INTERNAL_HPP_

// Internal single source of truth for the per-axis tile extents of the
// footprint rule. Not installed; shared by symbol and feature extraction.

#include <cstdint>
#include <unordered_map>

#include "tiletune/common.hpp"
#include "tiletune/schedule.hpp"

namespace tiletune {
namespace internal {

enum class Level { kL0, kL1, kL2 };

struct AxisTiles {
  bool spatial = false;
  int64_t extent = 1;
  int64_t l0 = 1;       // o*v for spatial, 1 for reduction
  int64_t l1 = 1;       // t*o*v for spatial, rb*rc for reduction
  int64_t v_inner = 1;  // innermost register factor: v for spatial, rc for reduction
};

struct TileTable {
  std::unordered_map<std::string, AxisTiles> axes;
  int64_t lanes_per_block = 1;  // s4
  int64_t blocks = 1;           // s6
  int64_t prod_ra = 1;
  int64_t reduction_total = 1;

  const AxisTiles& at(const std::string& name) const {
    auto it = axes.find(name);
    if (it == axes.end()) fail(err::kState, "no tile info for axis " + name);
    return it->second;
  }

  int64_t tile_extent(const std::string& axis, Level level) const {
    const AxisTiles& t = at(axis);
    switch (level) {
      case Level::kL0:
        return t.l0;
      case Level::kL1:
        return t.l1;
      case Level::kL2:
        return t.extent;
    }
    return 1;
  }

  int64_t footprint(const BufferSpec& buf, Level level) const {
    int64_t fp = 1;
    for (const auto& ax : buf.axes) fp *= tile_extent(ax, level);
    return fp;
  }

  int64_t inner_vector(const BufferSpec& buf) const {
    int64_t v = 1;
    for (const auto& ax : buf.axes) v *= at(ax).v_inner;
    return v;
  }
};

inline TileTable build_tiles(const Sketch& sketch, const Schedule& sched) {
  validate_schedule(sketch, sched);
  TileTable t;
  for (std::size_t i = 0; i < sketch.spatial.size(); ++i) {
    const auto& f = sched.spatial_factors[i];
    AxisTiles a;
    a.spatial = true;
    a.extent = sketch.spatial[i].extent;
    a.l0 = f[2] * f[3];
    a.l1 = f[1] * f[2] * f[3];
    a.v_inner = f[3];
    t.axes.emplace(sketch.spatial[i].axis, a);
    t.lanes_per_block *= f[1];
    t.blocks *= f[0];
  }
  for (std::size_t i = 0; i < sketch.reduction.size(); ++i) {
    const auto& f = sched.reduction_factors[i];
    AxisTiles a;
    a.spatial = false;
    a.extent = sketch.reduction[i].extent;
    a.l0 = 1;
    a.l1 = f[1] * f[2];
    a.v_inner = f[2];
    t.axes.emplace(sketch.reduction[i].axis, a);
    t.prod_ra *= f[0];
    t.reduction_total *= a.extent;
  }
  return t;
}

}  // namespace internal
}  // namespace tiletune

#endif  // TILETUNE_SRC_TILES_INTERNAL_HPP_
