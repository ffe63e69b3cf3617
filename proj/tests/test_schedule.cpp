#include <algorithm>
#include <doctest.h>
#include <map>
#include <set>

#include "test_helpers.hpp"
#include "tiletune/schedule.hpp"

using namespace tiletune;
using namespace tiletune::testing;

namespace {

// Independent oracle: ordered k-way factorizations by divisor recursion.
void brute_rec(int64_t n, int k, std::vector<int64_t>& cur,
               std::vector<std::vector<int64_t>>& out) {
  if (k == 1) {
    cur.push_back(n);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int64_t d = 1; d <= n; ++d) {
    if (n % d != 0) continue;
    cur.push_back(d);
    brute_rec(n / d, k - 1, cur, out);
    cur.pop_back();
  }
}

std::vector<std::vector<int64_t>> brute_factorizations(int64_t n, int k) {
  std::vector<std::vector<int64_t>> out;
  std::vector<int64_t> cur;
  brute_rec(n, k, cur, out);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("factorization enumeration matches the divisor-recursion oracle") {
  // frozen counts computed by the oracle: 4-way of 4 = 10, 3-way of 4 = 6,
  // 4-way of 8 = 20, 3-way of 8 = 10, 4-way of 12 = 40
  CHECK(brute_factorizations(4, 4).size() == 10);
  CHECK(brute_factorizations(4, 3).size() == 6);
  CHECK(brute_factorizations(8, 4).size() == 20);
  CHECK(brute_factorizations(8, 3).size() == 10);
  CHECK(brute_factorizations(12, 4).size() == 40);
  for (int64_t n : {1, 2, 3, 4, 6, 7, 8, 12, 16, 24, 36, 60, 64, 128}) {
    for (int k : {2, 3, 4}) {
      auto expect = brute_factorizations(n, k);
      CAPTURE(n);
      CAPTURE(k);
      CHECK(count_ordered_factorizations(n, k) == expect.size());
      CHECK(ordered_factorizations(n, k) == expect);
    }
  }
}

TEST_CASE("sketch structure follows the op's axes") {
  SUBCASE("gemm: two 4-way spatial slots, one 3-way reduction slot") {
    Sketch sk = generate_sketch(make_gemm("g", 128, 128, 128));
    REQUIRE(sk.spatial.size() == 2);
    REQUIRE(sk.reduction.size() == 1);
    CHECK(sk.spatial[0].arity == 4);
    CHECK(sk.unroll_choices == std::vector<int64_t>{1, 4, 16});
  }
  SUBCASE("conv-like: four-way per spatial axis, three-way per reduction axis") {
    Sketch sk = generate_sketch(make_conv("c", 8, 4, 4, 8, 3));
    CHECK(sk.spatial.size() == 3);
    CHECK(sk.reduction.size() == 2);
  }
  SUBCASE("extent-1 axis admits only all-ones") {
    TensorOpSpec op = make_gemm("g", 1, 8, 8);
    Sketch sk = generate_sketch(op);
    RngStream rng(3);
    for (const auto& s : random_init(sk, 50, rng))
      CHECK(s.spatial_factors[0] == std::vector<int64_t>{1, 1, 1, 1});
  }
  SUBCASE("elementwise rejected without the fallback") {
    CHECK_THROWS_WITH_AS(generate_sketch(make_elementwise("e", 8, 8)),
                         doctest::Contains("elementwise ops take the trivial sketch"), Error);
    Sketch sk = generate_sketch(make_elementwise("e", 8, 8), true);
    CHECK(sk.spatial[0].arity == 2);
    RngStream rng(4);
    for (const auto& s : random_init(sk, 30, rng)) {
      CHECK(s.spatial_factors[0][2] == 1);
      CHECK(s.spatial_factors[0][3] == 1);
    }
  }
}

TEST_CASE("random_init is deterministic and respects invariants") {
  Sketch sk = generate_sketch(make_gemm("g", 128, 128, 128));
  RngStream a(7), b(7);
  auto s1 = random_init(sk, 5, a);
  auto s2 = random_init(sk, 5, b);
  REQUIRE(s1.size() == s2.size());
  for (std::size_t i = 0; i < s1.size(); ++i)
    CHECK(schedule_key(sk, s1[i]) == schedule_key(sk, s2[i]));

  RngStream c(99);
  for (const auto& s : random_init(sk, 1000, c)) CHECK_NOTHROW(validate_schedule(sk, s));
}

TEST_CASE("prime extents admit only a single nontrivial factor position") {
  TensorOpSpec op = make_gemm("g", 7, 8, 8);
  Sketch sk = generate_sketch(op);
  RngStream rng(11);
  for (const auto& s : random_init(sk, 200, rng)) {
    int nontrivial = 0;
    for (int64_t f : s.spatial_factors[0]) {
      if (f == 7) ++nontrivial;
      CHECK((f == 1 || f == 7));
    }
    CHECK(nontrivial == 1);
  }
}

TEST_CASE("random_init samples factorizations uniformly") {
  // extent 4 split 2 ways: exactly (1,4), (2,2), (4,1)
  RngStream rng(5);
  std::map<std::vector<int64_t>, int> counts;
  const int draws = 6000;
  for (int i = 0; i < draws; ++i) counts[sample_factorization(4, 2, rng)]++;
  REQUIRE(counts.size() == 3);
  for (const auto& [tuple, n] : counts)
    CHECK(std::abs(n - draws / 3) < draws / 10);
}

TEST_CASE("enumerate_all matches the brute-force space") {
  TensorOpSpec op = make_gemm("g", 4, 4, 4);
  Sketch sk = generate_sketch(op);
  sk.unroll_choices = {1};
  // oracle: 10 * 10 * 6 ordered factorizations
  uint64_t expected =
      brute_factorizations(4, 4).size() * brute_factorizations(4, 4).size() *
      brute_factorizations(4, 3).size();
  CHECK(expected == 600);
  CHECK(space_size(sk) == expected);
  auto all = enumerate_all(sk, 100000);
  CHECK(all.size() == expected);
  std::set<std::string> keys;
  for (const auto& s : all) {
    CHECK_NOTHROW(validate_schedule(sk, s));
    keys.insert(schedule_key(sk, s));
  }
  CHECK(keys.size() == all.size());

  SUBCASE("every random draw lies inside the enumeration") {
    RngStream rng(13);
    for (const auto& s : random_init(sk, 300, rng)) CHECK(keys.count(schedule_key(sk, s)));
  }
  SUBCASE("cap guard reports the exact space size") {
    CHECK_THROWS_WITH_AS(enumerate_all(sk, 10),
                         doctest::Contains("space size 600 exceeds cap 10"), Error);
  }
}

TEST_CASE("all-ones space has exactly one schedule") {
  TensorOpSpec op = make_gemm("g", 1, 1, 1);
  Sketch sk = generate_sketch(op);
  sk.unroll_choices = {1};
  auto all = enumerate_all(sk, 10);
  REQUIRE(all.size() == 1);
  CHECK(all[0].unroll == 1);
}

TEST_CASE("mutate preserves products and changes at most one slot") {
  TensorOpSpec op = make_gemm("g", 128, 64, 32);
  Sketch sk = generate_sketch(op);
  RngStream rng(21);
  auto pop = random_init(sk, 16, rng);
  std::vector<double> costs;
  for (std::size_t i = 0; i < pop.size(); ++i) costs.push_back(1.0 + static_cast<double>(i));

  for (int gen = 0; gen < 20; ++gen) {
    auto next = mutate(pop, sk, costs, rng);
    REQUIRE(next.size() == pop.size());
    // elitism: slot 0 carries the best (lowest-cost) parent unchanged
    CHECK(schedule_key(sk, next[0]) == schedule_key(sk, pop[0]));
    for (const auto& s : next) CHECK_NOTHROW(validate_schedule(sk, s));
    pop = next;
  }
}

TEST_CASE("a single mutation touches one axis tuple or the unroll") {
  TensorOpSpec op = make_gemm("g", 128, 64, 32);
  Sketch sk = generate_sketch(op);
  RngStream rng(31);
  auto pop = random_init(sk, 1, rng);
  std::vector<double> costs{1.0};
  // population of one: the elite occupies the single output slot
  auto out = mutate(pop, sk, costs, rng);
  CHECK(schedule_key(sk, out[0]) == schedule_key(sk, pop[0]));

  // with two slots the child may differ, but in at most one place
  pop = random_init(sk, 2, rng);
  costs = {1.0, 2.0};
  for (int trial = 0; trial < 200; ++trial) {
    auto next = mutate(pop, sk, costs, rng);
    for (const auto& child : next) {
      int diffs = 0;
      for (const auto& parent : {pop[0], pop[1]}) {
        int d = 0;
        for (std::size_t a = 0; a < child.spatial_factors.size(); ++a)
          if (child.spatial_factors[a] != parent.spatial_factors[a]) ++d;
        for (std::size_t a = 0; a < child.reduction_factors.size(); ++a)
          if (child.reduction_factors[a] != parent.reduction_factors[a]) ++d;
        if (child.unroll != parent.unroll) ++d;
        if (diffs == 0 || d < diffs) diffs = d;
      }
      CHECK(diffs <= 1);
    }
  }
}

TEST_CASE("schedule keys round-trip") {
  Sketch sk = generate_sketch(make_gemm("g", 128, 128, 128));
  Schedule s = reference_gemm_schedule();
  std::string key = schedule_key(sk, s);
  CHECK(key == "m:4,8,2,2;n:4,8,2,2;k:4,8,4;u:1");
  Schedule back = schedule_from_key(sk, key);
  CHECK(schedule_key(sk, back) == key);
  CHECK_THROWS_AS(schedule_from_key(sk, "m:4,8,2,2;u:1"), Error);
  CHECK_THROWS_AS(schedule_from_key(sk, "m:4,8,2,3;n:4,8,2,2;k:4,8,4;u:1"), Error);
}
