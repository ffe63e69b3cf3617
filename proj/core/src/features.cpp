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
#include "tiletune/features.hpp"

#include <cmath>

#include "tiles_internal.hpp"

namespace tiletune {

using internal::Level;
using internal::TileTable;

namespace {

// dataflow slot indices (0-based)
constexpr int kFlowBase = 0;      // 6 one-hot slots
constexpr int kAccessBase = 6;    // 3 one-hot slots
constexpr int kAlloc = 9;
constexpr int kVolume = 10;
constexpr int kReuse = 11;
constexpr int kStride = 12;
constexpr int kContiguous = 13;
constexpr int kDensity = 14;
constexpr int kLanes = 15;
constexpr int kPerLane = 16;
constexpr int kRank = 17;
constexpr int kDepth = 18;
constexpr int kRedCarried = 19;
constexpr int kUnroll = 20;
constexpr int kS7 = 21;
constexpr int kBias = 22;

enum Flow { kFlowL2L1 = 0, kFlowL1L0, kFlowL0Compute, kFlowL0L2, kFlowL1L2, kFlowIntraL0 };
enum Access { kRead = 0, kWrite, kReadWrite };

double lg(double x) { return std::log1p(x); }
double lg(int64_t x) { return std::log1p(static_cast<double>(x)); }

bool has_reduction_axis(const TensorOpSpec& op, const BufferSpec& buf) {
  for (const auto& ax : buf.axes)
    for (const auto& r : op.reduction_axes)
      if (r.name == ax) return true;
  return false;
}

struct BlockArgs {
  Flow flow;
  Access access;
  int64_t alloc;
  int64_t volume;
  int64_t distinct;  // distinct elements touched, for the reuse factor
  int64_t stride;
  bool contiguous;
  int64_t per_lane;
  int rank;
  int depth;
  bool reduction_carried;
};

DataflowBlockFeature make_block(const BlockArgs& a, int64_t flops, int64_t lanes,
                                int64_t unroll, int64_t s7) {
  DataflowBlockFeature f{};
  f[kFlowBase + a.flow] = 1.0;
  f[kAccessBase + a.access] = 1.0;
  f[kAlloc] = lg(a.alloc);
  f[kVolume] = lg(a.volume);
  f[kReuse] = lg(static_cast<double>(a.volume) / static_cast<double>(std::max<int64_t>(a.distinct, 1)));
  f[kStride] = lg(a.stride);
  f[kContiguous] = a.contiguous ? 1.0 : 0.0;
  f[kDensity] = lg(static_cast<double>(flops) / static_cast<double>(std::max<int64_t>(a.volume, 1)));
  f[kLanes] = lg(lanes);
  f[kPerLane] = lg(a.per_lane);
  f[kRank] = a.rank / 8.0;
  f[kDepth] = a.depth / 16.0;
  f[kRedCarried] = a.reduction_carried ? 1.0 : 0.0;
  f[kUnroll] = lg(unroll);
  f[kS7] = lg(s7);
  f[kBias] = 1.0;
  return f;
}

}  // namespace

HybridFeature extract_features(const Sketch& sketch, const Schedule& sched,
                               const DeviceSpec& device) {
  const TensorOpSpec& op = sketch.op;
  TileTable tiles = internal::build_tiles(sketch, sched);
  auto symbols = extract_symbols(sketch, sched);
  int64_t flops = flops_of(op);
  int64_t total_traffic = 0;
  for (const auto& ss : symbols) total_traffic += ss.symbols.s5;

  HybridFeature out;

  for (const auto& ss : symbols) {
    const SymbolSet& s = ss.symbols;
    PenaltySet p = compute_penalties(s, device);
    StatementFeature f{};
    f[0] = lg(s.s1);
    f[1] = lg(s.s2);
    f[2] = lg(s.s3);
    f[3] = lg(s.s4);
    f[4] = lg(s.s5);
    f[5] = lg(s.s6);
    f[6] = lg(s.s7);
    f[7] = lg(s.s8);
    f[8] = p.p_l0_m;
    f[9] = lg(p.p_l0_c);
    f[10] = p.p_l1_m;
    f[11] = p.p_l1_c;
    f[12] = p.alpha_l1;
    f[13] = p.p_l2_c;
    f[14] = p.p_l2_m;
    f[15] = lg(flops);
    f[16] = lg(total_traffic);
    f[17] = lg(static_cast<double>(s.s8) / static_cast<double>(std::max<int64_t>(s.s5, 1)));
    f[18] = static_cast<double>(s.s4) / static_cast<double>(device.pu_l1 * device.n_l1);
    f[19] = lg(static_cast<double>(s.s6) / static_cast<double>(device.pu_l2));
    f[20] = lg(sched.unroll);
    f[21] = static_cast<double>(op.fused_elementwise);
    f[22] = static_cast<int>(ss.stmt.kind) / 4.0;
    f[23] = 1.0;
    out.statements.push_back(f);
  }

  if (op.kind == OpKind::kElementwise) {
    DataflowBlockFeature zero{};
    zero[kBias] = 1.0;
    out.dataflow.push_back(zero);
    return out;
  }

  int64_t lanes = tiles.lanes_per_block * tiles.blocks;
  int64_t output_size = 1;
  for (const auto& a : op.spatial_axes) output_size *= a.extent;
  const BufferSpec& output = op.output_buffer();
  const std::string innermost_spatial = op.spatial_axes.back().name;
  int n_sp = static_cast<int>(op.spatial_axes.size());
  int n_red = static_cast<int>(op.reduction_axes.size());

  auto buffer_size = [&](const BufferSpec& buf) {
    int64_t size = 1;
    for (const auto& ax : buf.axes) size *= op.axis_extent(ax);
    return size;
  };
  auto register_stride = [&](const BufferSpec& buf) -> int64_t {
    // 1 when the buffer's contiguous axis is iterated innermost; otherwise
    // successive accesses jump by the L1-tile row width along that axis
    if (buf.axes.back() == innermost_spatial) return 1;
    return tiles.tile_extent(buf.axes.back(), Level::kL1);
  };

  for (const auto& ss : symbols) {
    const SymbolSet& s = ss.symbols;
    switch (ss.stmt.kind) {
      case StatementKind::kLoadL2ToL1: {
        const BufferSpec& buf = op.buffers[ss.stmt.buffer_index];
        BlockArgs a;
        a.flow = kFlowL2L1;
        a.access = kRead;
        a.alloc = tiles.footprint(buf, Level::kL1);
        a.volume = s.s5;
        a.distinct = buffer_size(buf);
        a.stride = 1;
        a.contiguous = s.s7 % device.n_l2 == 0;
        a.per_lane = (a.alloc + tiles.lanes_per_block - 1) / tiles.lanes_per_block;
        a.rank = static_cast<int>(buf.axes.size());
        a.depth = n_sp + n_red;
        a.reduction_carried = has_reduction_axis(op, buf);
        out.dataflow.push_back(make_block(a, flops, lanes, sched.unroll, s.s7));
        break;
      }
      case StatementKind::kLoadL1ToL0: {
        const BufferSpec& buf = op.buffers[ss.stmt.buffer_index];
        BlockArgs a;
        a.flow = kFlowL1L0;
        a.access = kRead;
        a.alloc = tiles.footprint(buf, Level::kL0);
        a.volume = lanes * tiles.reduction_total * a.alloc;
        a.distinct = buffer_size(buf);
        a.stride = register_stride(buf);
        a.contiguous = a.stride == 1;
        a.per_lane = tiles.inner_vector(buf);
        a.rank = static_cast<int>(buf.axes.size());
        a.depth = 2 * (n_sp + n_red);
        a.reduction_carried = has_reduction_axis(op, buf);
        out.dataflow.push_back(make_block(a, flops, lanes, sched.unroll, s.s7));
        break;
      }
      case StatementKind::kComputeL0: {
        // one block per input operand, then the intra-L0 accumulation block
        for (int i = 0; i < static_cast<int>(op.buffers.size()); ++i) {
          const BufferSpec& buf = op.buffers[i];
          if (buf.io != BufferIo::kInput) continue;
          BlockArgs a;
          a.flow = kFlowL0Compute;
          a.access = kRead;
          a.alloc = tiles.footprint(buf, Level::kL0);
          a.volume = flops;
          a.distinct = buffer_size(buf);
          a.stride = register_stride(buf);
          a.contiguous = a.stride == 1;
          a.per_lane = tiles.inner_vector(buf);
          a.rank = static_cast<int>(buf.axes.size());
          a.depth = 2 * (n_sp + n_red) + n_red + 2 * n_sp;
          a.reduction_carried = has_reduction_axis(op, buf);
          out.dataflow.push_back(make_block(a, flops, lanes, sched.unroll, s.s7));
        }
        BlockArgs a;
        a.flow = kFlowIntraL0;
        a.access = kReadWrite;
        a.alloc = tiles.footprint(output, Level::kL0);
        a.volume = flops;
        a.distinct = output_size;
        a.stride = 1;
        a.contiguous = true;
        a.per_lane = tiles.inner_vector(output);
        a.rank = static_cast<int>(output.axes.size());
        a.depth = 2 * (n_sp + n_red) + n_red + 2 * n_sp;
        a.reduction_carried = true;
        out.dataflow.push_back(make_block(a, flops, lanes, sched.unroll, s.s7));
        break;
      }
      case StatementKind::kStoreL0ToL2: {
        BlockArgs a;
        a.flow = kFlowL0L2;
        a.access = kWrite;
        a.alloc = output_size;
        a.volume = s.s5;
        a.distinct = output_size;
        a.stride = 1;
        a.contiguous = s.s7 % device.n_l2 == 0;
        a.per_lane = tiles.footprint(output, Level::kL0);
        a.rank = static_cast<int>(output.axes.size());
        a.depth = 4 * n_sp;
        a.reduction_carried = false;
        out.dataflow.push_back(make_block(a, flops, lanes, sched.unroll, s.s7));
        break;
      }
    }
  }
  return out;
}

}  // namespace tiletune
