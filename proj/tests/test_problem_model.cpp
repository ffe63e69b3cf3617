#include <doctest.h>

#include "test_helpers.hpp"
#include "tiletune/common.hpp"
#include "tiletune/device.hpp"
#include "tiletune/workload.hpp"

using namespace tiletune;
using namespace tiletune::testing;

namespace {

std::string device_text(const char* drop_key = nullptr, const char* override_line = nullptr) {
  std::vector<std::string> lines = {
      "m_l0 = 256", "m_l1 = 4096",  "pu_l1 = 4", "n_l1 = 32", "pu_l2 = 8",
      "n_l2 = 32",  "t_p = 1.0e12", "t_m = 1.0e11", "element_bytes = 4"};
  std::string out;
  for (auto& l : lines) {
    if (drop_key && l.rfind(drop_key, 0) == 0) continue;
    out += l;
    out += "\n";
  }
  if (override_line) {
    out += override_line;
    out += "\n";
  }
  return out;
}

}  // namespace

TEST_CASE("device file parses field-for-field") {
  DeviceSpec d = parse_device(device_text());
  CHECK(d.m_l0 == 256);
  CHECK(d.n_l1 == 32);
  CHECK(d.pu_l2 == 8);
  CHECK(d.t_m == doctest::Approx(1.0e11));
}

TEST_CASE("device validation names the offending field") {
  CHECK_THROWS_WITH_AS(parse_device(device_text("n_l1", "n_l1 = 48")),
                       doctest::Contains("n_l1 must be a power of two"), Error);
  CHECK_THROWS_WITH_AS(parse_device(device_text("t_m")), doctest::Contains("missing field t_m"),
                       Error);
  CHECK_THROWS_WITH_AS(parse_device(device_text("m_l0", "m_l0 = 0")),
                       doctest::Contains("m_l0"), Error);
  CHECK_THROWS_WITH_AS(parse_device(device_text(nullptr, "extra = 1")),
                       doctest::Contains("unknown field extra"), Error);
}

TEST_CASE("device serialize/load round-trip") {
  DeviceSpec d = reference_device();
  DeviceSpec back = parse_device(serialize_device(d));
  CHECK(back.m_l0 == d.m_l0);
  CHECK(back.m_l1 == d.m_l1);
  CHECK(back.pu_l1 == d.pu_l1);
  CHECK(back.n_l1 == d.n_l1);
  CHECK(back.pu_l2 == d.pu_l2);
  CHECK(back.n_l2 == d.n_l2);
  CHECK(back.t_p == d.t_p);
  CHECK(back.t_m == d.t_m);
  CHECK(back.element_bytes == d.element_bytes);
}

TEST_CASE("workload parses tasks in order with weights") {
  std::string text = R"({"tasks":[
    {"name":"g","spatial_axes":[["m",128],["n",128]],"reduction_axes":[["k",128]],
     "buffers":[{"name":"A","axes":["m","k"],"io":"input"},
                {"name":"B","axes":["k","n"],"io":"input"},
                {"name":"C","axes":["m","n"],"io":"output"}],
     "weight":3},
    {"name":"r","spatial_axes":[["h",8],["w",8]],"reduction_axes":[],
     "buffers":[{"name":"X","axes":["h","w"],"io":"input"},
                {"name":"Y","axes":["h","w"],"io":"output"}],"weight":1}
  ]})";
  auto tasks = parse_workload(text);
  REQUIRE(tasks.size() == 2);
  CHECK(tasks[0].op.name == "g");
  CHECK(tasks[0].weight == 3);
  CHECK(tasks[0].op.kind == OpKind::kTiled);
  CHECK(tasks[1].op.kind == OpKind::kElementwise);
}

TEST_CASE("workload with fused stage keeps the count") {
  std::string text = R"({"tasks":[
    {"name":"g","spatial_axes":[["m",16],["n",16]],"reduction_axes":[["k",16]],
     "buffers":[{"name":"A","axes":["m","k"],"io":"input"},
                {"name":"B","axes":["k","n"],"io":"input"},
                {"name":"C","axes":["m","n"],"io":"output"}],
     "weight":1,"fused_elementwise":1}
  ]})";
  auto tasks = parse_workload(text);
  CHECK(tasks[0].op.fused_elementwise == 1);
}

TEST_CASE("workload rejects a buffer with an unknown axis") {
  std::string text = R"({"tasks":[
    {"name":"g","spatial_axes":[["m",16]],"reduction_axes":[],
     "buffers":[{"name":"X","axes":["q"],"io":"input"},
                {"name":"Y","axes":["m"],"io":"output"}],"weight":1}
  ]})";
  CHECK_THROWS_WITH_AS(parse_workload(text), doctest::Contains("unknown axis q"), Error);
}

TEST_CASE("workload validation rules") {
  TensorOpSpec op = make_gemm("g", 8, 8, 8);
  SUBCASE("two outputs rejected") {
    op.buffers.push_back({"D", {"m", "n"}, BufferIo::kOutput});
    CHECK_THROWS_WITH_AS(validate_op(op), doctest::Contains("exactly one output"), Error);
  }
  SUBCASE("unreferenced axis rejected") {
    op.spatial_axes.push_back({"z", 4});
    CHECK_THROWS_WITH_AS(validate_op(op), doctest::Contains("referenced by no buffer"), Error);
  }
  SUBCASE("zero extent rejected") {
    op.spatial_axes[0].extent = 0;
    CHECK_THROWS_WITH_AS(validate_op(op), doctest::Contains("extent must be >= 1"), Error);
  }
  SUBCASE("duplicate buffer axis rejected") {
    op.buffers[0].axes = {"m", "m"};
    CHECK_THROWS_WITH_AS(validate_op(op), doctest::Contains("repeats axis"), Error);
  }
}

TEST_CASE("workload serialize/parse round-trips structurally") {
  std::vector<SubgraphTask> tasks;
  tasks.push_back({make_gemm("g", 128, 64, 32, 2), 5});
  tasks.push_back({make_elementwise("e", 16, 8), 1});
  tasks.push_back({make_conv("c", 8, 4, 4, 8, 3), 2});
  auto back = parse_workload(serialize_workload(tasks));
  REQUIRE(back.size() == tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    CHECK(back[i].weight == tasks[i].weight);
    CHECK(op_equal(back[i].op, tasks[i].op));
  }
}

TEST_CASE("flops counts one fused op per index point") {
  // hand-evaluated products
  CHECK(flops_of(make_gemm("g", 128, 128, 128)) == int64_t{128} * 128 * 128);
  CHECK(flops_of(make_gemm("g", 128, 128, 128)) == 2097152);
  CHECK(flops_of(make_gemm("g", 1, 1, 1)) == 1);
  CHECK(flops_of(make_elementwise("r", 128, 128)) == 16384);
}

TEST_CASE("flops is multiplicative in every extent") {
  auto base = make_gemm("g", 8, 12, 10);
  int64_t f0 = flops_of(base);
  for (int axis = 0; axis < 3; ++axis) {
    auto op = base;
    if (axis == 0) op.spatial_axes[0].extent *= 2;
    if (axis == 1) op.spatial_axes[1].extent *= 2;
    if (axis == 2) op.reduction_axes[0].extent *= 2;
    CHECK(flops_of(op) == 2 * f0);
  }
}
