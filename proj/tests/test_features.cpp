#include <doctest.h>
#include <set>

#include "test_helpers.hpp"
#include "tiletune/features.hpp"

using namespace tiletune;
using namespace tiletune::testing;

namespace {

bool features_equal(const HybridFeature& a, const HybridFeature& b) {
  return a.statements == b.statements && a.dataflow == b.dataflow;
}

}  // namespace

TEST_CASE("gemm dataflow sequence has eight blocks in traversal order") {
  TensorOpSpec op = make_gemm("g", 128, 128, 128);
  Sketch sk = generate_sketch(op);
  DeviceSpec dev = reference_device();
  HybridFeature f = extract_features(sk, reference_gemm_schedule(), dev);
  CHECK(f.statements.size() == 6);
  // 2 loads into L1, 2 loads into registers, 3 compute-statement blocks
  // (two operands + accumulation), 1 store
  REQUIRE(f.dataflow.size() == 8);

  auto flow_slot = [](const DataflowBlockFeature& b) {
    for (int i = 0; i < 6; ++i)
      if (b[i] == 1.0) return i;
    return -1;
  };
  CHECK(flow_slot(f.dataflow[0]) == 0);  // L2 -> L1
  CHECK(flow_slot(f.dataflow[1]) == 0);
  CHECK(flow_slot(f.dataflow[2]) == 1);  // L1 -> L0
  CHECK(flow_slot(f.dataflow[3]) == 1);
  CHECK(flow_slot(f.dataflow[4]) == 2);  // L0 -> compute
  CHECK(flow_slot(f.dataflow[5]) == 2);
  CHECK(flow_slot(f.dataflow[6]) == 5);  // intra-L0 accumulation
  CHECK(flow_slot(f.dataflow[7]) == 3);  // L0 -> L2 store
}

TEST_CASE("block one-hot and range invariants hold on random schedules") {
  TensorOpSpec op = make_conv("c", 16, 6, 6, 12, 3);
  Sketch sk = generate_sketch(op);
  DeviceSpec dev = reference_device();
  RngStream rng(71);
  for (const auto& sched : random_init(sk, 200, rng)) {
    HybridFeature f = extract_features(sk, sched, dev);
    for (const auto& block : f.dataflow) {
      int flows = 0, accesses = 0;
      for (int i = 0; i < 6; ++i) flows += block[i] == 1.0;
      for (int i = 6; i < 9; ++i) accesses += block[i] == 1.0;
      CHECK(flows == 1);
      CHECK(accesses == 1);
      for (double v : block) {
        CHECK(std::isfinite(v));
      }
      for (int i : {9, 10, 11, 12, 14, 15, 16, 20, 21}) CHECK(block[i] >= 0.0);
    }
    for (const auto& stmt : f.statements) {
      CHECK(stmt.size() == 24);
      for (double v : stmt) CHECK(std::isfinite(v));
    }
  }
}

TEST_CASE("pure elementwise ops carry the zero-padded block") {
  TensorOpSpec op = make_elementwise("e", 128, 128);
  Sketch sk = generate_sketch(op, true);
  DeviceSpec dev = reference_device();
  RngStream rng(73);
  Schedule sched = random_init(sk, 1, rng)[0];
  HybridFeature f = extract_features(sk, sched, dev);
  REQUIRE(f.dataflow.size() == 1);
  for (int i = 0; i < kDataflowFeatureWidth - 1; ++i) CHECK(f.dataflow[0][i] == 0.0);
  CHECK(f.dataflow[0][kDataflowFeatureWidth - 1] == 1.0);  // bias slot
  CHECK(!f.statements.empty());
}

TEST_CASE("distinct schedules never collide in feature space") {
  TensorOpSpec op = make_gemm("g", 128, 128, 128);
  Sketch sk = generate_sketch(op);
  DeviceSpec dev = reference_device();
  RngStream rng(79);
  auto pool = random_init(sk, 2000, rng);
  int compared = 0;
  for (std::size_t i = 0; i + 1 < pool.size() && compared < 1000; i += 2, ++compared) {
    const Schedule& a = pool[i];
    const Schedule& b = pool[i + 1];
    bool same_schedule = schedule_key(sk, a) == schedule_key(sk, b);
    bool same_features =
        features_equal(extract_features(sk, a, dev), extract_features(sk, b, dev));
    if (same_schedule)
      CHECK(same_features);
    else
      CHECK(!same_features);
  }
  CHECK(compared == 1000);
}

TEST_CASE("near-miss schedules that share every product still separate") {
  // same b, t and o*v per axis; only the (o, v) split differs
  TensorOpSpec op = make_gemm("g", 128, 128, 128);
  Sketch sk = generate_sketch(op);
  DeviceSpec dev = reference_device();
  Schedule a = make_schedule({{4, 8, 2, 2}, {4, 8, 2, 2}}, {{4, 8, 4}});
  Schedule b = make_schedule({{4, 8, 4, 1}, {4, 8, 2, 2}}, {{4, 8, 4}});
  Schedule c = make_schedule({{4, 8, 2, 2}, {4, 8, 2, 2}}, {{4, 16, 2}});  // rb/rc re-split
  CHECK(!features_equal(extract_features(sk, a, dev), extract_features(sk, b, dev)));
  CHECK(!features_equal(extract_features(sk, a, dev), extract_features(sk, c, dev)));
}
