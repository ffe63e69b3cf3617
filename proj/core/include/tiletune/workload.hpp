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
#ifndef TILETUNE_WORKLOAD_HPP_
#define TILETUNE_WORKLOAD_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace tiletune {

enum class BufferIo { kInput, kOutput };

/// One tensor buffer of an operator. `axes` is the ordered subset of the
/// operator's axes indexing the buffer; the last entry is the innermost
/// (contiguous) axis.
struct BufferSpec {
  std::string name;
  std::vector<std::string> axes;
  BufferIo io = BufferIo::kInput;
};

enum class OpKind { kTiled, kElementwise };

struct Axis {
  std::string name;
  int64_t extent = 0;
};

/// Axis/extent/buffer structure of one tensor operator. No numerics are ever
/// executed; the op is only a shape for footprint and latency estimation.
struct TensorOpSpec {
  std::string name;
  std::vector<Axis> spatial_axes;
  std::vector<Axis> reduction_axes;
  std::vector<BufferSpec> buffers;
  int fused_elementwise = 0;  // trailing element-wise stages fused at register level
  OpKind kind = OpKind::kTiled;

  const BufferSpec& output_buffer() const;
  bool has_axis(const std::string& axis) const;
  int64_t axis_extent(const std::string& axis) const;
};

/// One pre-partitioned subgraph plus its occurrence count in the full graph.
struct SubgraphTask {
  TensorOpSpec op;
  int64_t weight = 1;
};

void validate_op(const TensorOpSpec& op);

/// Loads the workload document (JSON with a `tasks` array), preserving file
/// order and weights. kind is inferred: ops with reduction axes are tiled,
/// reduction-free ops are element-wise.
std::vector<SubgraphTask> load_workload(const std::string& path);
std::vector<SubgraphTask> parse_workload(const std::string& text);

std::string serialize_workload(const std::vector<SubgraphTask>& tasks);
void save_workload(const std::vector<SubgraphTask>& tasks, const std::string& path);

/// Total fused-op count of one complete evaluation of the operator: the
/// product of all spatial and reduction extents (spatial only for
/// element-wise ops). A fused multiply-add counts as one op.
int64_t flops_of(const TensorOpSpec& op);

bool op_equal(const TensorOpSpec& a, const TensorOpSpec& b);

}  // namespace tiletune

#endif  // TILETUNE_WORKLOAD_HPP_
