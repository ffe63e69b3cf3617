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
#include "tiletune/workload.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "tiletune/common.hpp"

namespace tiletune {

using ordered_json = nlohmann::ordered_json;

const BufferSpec& TensorOpSpec::output_buffer() const {
  for (const auto& b : buffers)
    if (b.io == BufferIo::kOutput) return b;
  fail(err::kState, "op " + name + " has no output buffer");
}

bool TensorOpSpec::has_axis(const std::string& axis) const {
  auto match = [&](const Axis& a) { return a.name == axis; };
  return std::any_of(spatial_axes.begin(), spatial_axes.end(), match) ||
         std::any_of(reduction_axes.begin(), reduction_axes.end(), match);
}

int64_t TensorOpSpec::axis_extent(const std::string& axis) const {
  for (const auto& a : spatial_axes)
    if (a.name == axis) return a.extent;
  for (const auto& a : reduction_axes)
    if (a.name == axis) return a.extent;
  fail(err::kState, "op " + name + " has no axis " + axis);
}

void validate_op(const TensorOpSpec& op) {
  if (op.name.empty()) fail(err::kValidate, "op name must be non-empty");
  std::set<std::string> axis_names;
  auto check_axes = [&](const std::vector<Axis>& axes) {
    for (const auto& a : axes) {
      if (a.extent < 1)
        fail(err::kValidate,
             "op " + op.name + ": axis " + a.name + " extent must be >= 1, got " +
                 std::to_string(a.extent));
      if (!axis_names.insert(a.name).second)
        fail(err::kValidate, "op " + op.name + ": duplicate axis " + a.name);
    }
  };
  check_axes(op.spatial_axes);
  check_axes(op.reduction_axes);
  if (op.kind == OpKind::kTiled && op.spatial_axes.empty())
    fail(err::kValidate, "op " + op.name + ": a tiled op needs at least one spatial axis");
  if (op.buffers.empty()) fail(err::kValidate, "op " + op.name + ": no buffers");

  int outputs = 0;
  std::set<std::string> referenced;
  for (const auto& b : op.buffers) {
    if (b.axes.empty())
      fail(err::kValidate, "op " + op.name + ": buffer " + b.name + " has no axes");
    std::set<std::string> seen;
    for (const auto& ax : b.axes) {
      if (!axis_names.count(ax))
        fail(err::kValidate,
             "op " + op.name + ": buffer " + b.name + " references unknown axis " + ax);
      if (!seen.insert(ax).second)
        fail(err::kValidate,
             "op " + op.name + ": buffer " + b.name + " repeats axis " + ax);
      referenced.insert(ax);
    }
    if (b.io == BufferIo::kOutput) ++outputs;
  }
  if (outputs != 1)
    fail(err::kValidate,
         "op " + op.name + ": exactly one output buffer required, got " + std::to_string(outputs));
  for (const auto& name : axis_names)
    if (!referenced.count(name))
      fail(err::kValidate, "op " + op.name + ": axis " + name + " referenced by no buffer");
  if (op.fused_elementwise < 0)
    fail(err::kValidate, "op " + op.name + ": fused_elementwise must be >= 0");
}

namespace {

TensorOpSpec op_from_json(const ordered_json& j) {
  TensorOpSpec op;
  if (!j.contains("name")) fail(err::kParse, "task missing name");
  op.name = j.at("name").get<std::string>();
  auto read_axes = [&](const char* key, std::vector<Axis>& out) {
    if (!j.contains(key)) return;
    for (const auto& item : j.at(key)) {
      if (!item.is_array() || item.size() != 2)
        fail(err::kParse, "op " + op.name + ": " + key + " entries must be [name, extent]");
      out.push_back({item[0].get<std::string>(), item[1].get<int64_t>()});
    }
  };
  read_axes("spatial_axes", op.spatial_axes);
  read_axes("reduction_axes", op.reduction_axes);
  if (!j.contains("buffers")) fail(err::kParse, "op " + op.name + ": missing buffers");
  for (const auto& jb : j.at("buffers")) {
    BufferSpec b;
    b.name = jb.at("name").get<std::string>();
    for (const auto& ax : jb.at("axes")) b.axes.push_back(ax.get<std::string>());
    std::string io = jb.at("io").get<std::string>();
    if (io == "input")
      b.io = BufferIo::kInput;
    else if (io == "output")
      b.io = BufferIo::kOutput;
    else
      fail(err::kParse, "op " + op.name + ": buffer " + b.name + ": bad io \"" + io + "\"");
    op.buffers.push_back(std::move(b));
  }
  op.fused_elementwise = j.value("fused_elementwise", 0);
  op.kind = op.reduction_axes.empty() ? OpKind::kElementwise : OpKind::kTiled;
  validate_op(op);
  return op;
}

ordered_json op_to_json(const TensorOpSpec& op) {
  ordered_json j;
  j["name"] = op.name;
  j["spatial_axes"] = ordered_json::array();
  for (const auto& a : op.spatial_axes) j["spatial_axes"].push_back({a.name, a.extent});
  j["reduction_axes"] = ordered_json::array();
  for (const auto& a : op.reduction_axes) j["reduction_axes"].push_back({a.name, a.extent});
  j["buffers"] = ordered_json::array();
  for (const auto& b : op.buffers) {
    ordered_json jb;
    jb["name"] = b.name;
    jb["axes"] = b.axes;
    jb["io"] = b.io == BufferIo::kInput ? "input" : "output";
    j["buffers"].push_back(std::move(jb));
  }
  if (op.fused_elementwise > 0) j["fused_elementwise"] = op.fused_elementwise;
  return j;
}

}  // namespace

std::vector<SubgraphTask> parse_workload(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const std::exception& e) {
    fail(err::kParse, std::string("workload parse failure: ") + e.what());
  }
  if (!doc.contains("tasks") || !doc.at("tasks").is_array())
    fail(err::kParse, "workload document needs a tasks array");
  std::vector<SubgraphTask> tasks;
  std::set<std::string> names;
  for (const auto& jt : doc.at("tasks")) {
    SubgraphTask t;
    t.op = op_from_json(jt);
    t.weight = jt.value("weight", int64_t{1});
    if (t.weight < 1)
      fail(err::kValidate, "task " + t.op.name + ": weight must be >= 1, got " +
                               std::to_string(t.weight));
    if (!names.insert(t.op.name).second)
      fail(err::kValidate, "duplicate task name " + t.op.name);
    tasks.push_back(std::move(t));
  }
  if (tasks.empty()) fail(err::kValidate, "workload has no tasks");
  return tasks;
}

std::vector<SubgraphTask> load_workload(const std::string& path) {
  return parse_workload(read_file(path));
}

std::string serialize_workload(const std::vector<SubgraphTask>& tasks) {
  ordered_json doc;
  doc["tasks"] = ordered_json::array();
  for (const auto& t : tasks) {
    ordered_json jt = op_to_json(t.op);
    jt["weight"] = t.weight;
    doc["tasks"].push_back(std::move(jt));
  }
  return doc.dump(2) + "\n";
}

void save_workload(const std::vector<SubgraphTask>& tasks, const std::string& path) {
  write_file(path, serialize_workload(tasks));
}

int64_t flops_of(const TensorOpSpec& op) {
  int64_t total = 1;
  for (const auto& a : op.spatial_axes) total *= a.extent;
  if (op.kind == OpKind::kTiled)
    for (const auto& a : op.reduction_axes) total *= a.extent;
  return total;
}

bool op_equal(const TensorOpSpec& a, const TensorOpSpec& b) {
  auto axes_equal = [](const std::vector<Axis>& x, const std::vector<Axis>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i].name != y[i].name || x[i].extent != y[i].extent) return false;
    return true;
  };
  if (a.name != b.name || a.kind != b.kind || a.fused_elementwise != b.fused_elementwise)
    return false;
  if (!axes_equal(a.spatial_axes, b.spatial_axes) ||
      !axes_equal(a.reduction_axes, b.reduction_axes))
    return false;
  if (a.buffers.size() != b.buffers.size()) return false;
  for (std::size_t i = 0; i < a.buffers.size(); ++i) {
    if (a.buffers[i].name != b.buffers[i].name || a.buffers[i].axes != b.buffers[i].axes ||
        a.buffers[i].io != b.buffers[i].io)
      return false;
  }
  return true;
}

}  // namespace tiletune
