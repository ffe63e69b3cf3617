#include <cmath>
#include <doctest.h>

#include "test_helpers.hpp"
#include "tiletune/common.hpp"
#include "tiletune/metrics.hpp"

using namespace tiletune;
using namespace tiletune::testing;

namespace {

LabeledDataset two_task_dataset() {
  TaskLabels a;
  a.task = "a";
  a.weight = 2;
  a.latencies = {4.0, 1.0, 2.0, 8.0};
  TaskLabels b;
  b.task = "b";
  b.weight = 1;
  b.latencies = {3.0, 6.0, 1.5};
  return make_dataset({a, b});
}

}  // namespace

TEST_CASE("a perfect ranker reaches exactly one") {
  LabeledDataset ds = two_task_dataset();
  // higher score = faster: score with negative latency
  std::vector<std::vector<double>> scores;
  for (const auto& t : ds.tasks) {
    std::vector<double> s;
    for (double l : t.latencies) s.push_back(-l);
    scores.push_back(s);
  }
  CHECK(top_k(ds, scores, 1) == 1.0);
  CHECK(top_k(ds, scores, 3) == 1.0);
}

TEST_CASE("k spanning the whole list is one regardless of the model") {
  LabeledDataset ds = two_task_dataset();
  std::vector<std::vector<double>> scores{{0.1, 0.2, 0.3, 0.4}, {7.0, 5.0, 6.0}};
  CHECK(top_k(ds, scores, 3) == 1.0);  // every task list has >= 3 entries
  CHECK_THROWS_AS(top_k(ds, scores, 4), Error);
}

TEST_CASE("score ties rank pessimistically") {
  TaskLabels t;
  t.task = "t";
  t.weight = 1;
  t.latencies = {1.0, 5.0};
  LabeledDataset ds = make_dataset({t});
  // equal scores: the worse latency is ranked first
  CHECK(top_k(ds, {{2.0, 2.0}}, 1) == doctest::Approx(1.0 / 5.0));
}

TEST_CASE("top_k grows with k, best_k shrinks with k") {
  RngStream rng(161);
  TaskLabels t;
  t.task = "t";
  t.weight = 3;
  for (int i = 0; i < 50; ++i) t.latencies.push_back(1.0 + 10.0 * rng.uniform_real());
  LabeledDataset ds = make_dataset({t});
  std::vector<double> scores;
  for (int i = 0; i < 50; ++i) scores.push_back(rng.uniform_real());

  double prev = 0.0;
  for (int k = 1; k <= 50; ++k) {
    double v = top_k(ds, {scores}, k);
    CHECK(v >= prev);
    CHECK(v <= 1.0);
    prev = v;
  }
  prev = 2.0;
  for (int k = 1; k <= 50; ++k) {
    double v = best_k(ds, {t.latencies}, k);
    CHECK(v <= prev);
    CHECK(v <= 1.0);
    prev = v;
  }
}

TEST_CASE("best_k closed forms") {
  TaskLabels t;
  t.task = "t";
  t.weight = 1;
  t.latencies = {1.0, 1.25};
  LabeledDataset ds = make_dataset({t});
  SUBCASE("optimum retained gives one") { CHECK(best_k(ds, {{1.25, 1.0}}, 1) == 1.0); }
  SUBCASE("second best of {1.0, 1.25} is 0.8") {
    CHECK(best_k(ds, {{1.0, 1.25}}, 2) == doctest::Approx(0.8));
  }
  SUBCASE("drafted set smaller than k errors") {
    CHECK_THROWS_AS(best_k(ds, {{1.0}}, 2), Error);
  }
}

TEST_CASE("metrics are invariant under uniform latency scaling") {
  LabeledDataset ds = two_task_dataset();
  std::vector<std::vector<double>> scores{{0.4, 0.1, 0.9, 0.2}, {0.8, 0.3, 0.5}};
  std::vector<std::vector<double>> drafted{{4.0, 2.0}, {3.0, 1.5}};
  double t1 = top_k(ds, scores, 2);
  double b1 = best_k(ds, drafted, 1);

  LabeledDataset scaled = ds;
  for (auto& t : scaled.tasks) {
    for (auto& l : t.latencies) l *= 1000.0;
    t.best *= 1000.0;
  }
  std::vector<std::vector<double>> drafted_scaled = drafted;
  for (auto& v : drafted_scaled)
    for (auto& l : v) l *= 1000.0;
  CHECK(top_k(scaled, scores, 2) == doctest::Approx(t1).epsilon(1e-12));
  CHECK(best_k(scaled, drafted_scaled, 1) == doctest::Approx(b1).epsilon(1e-12));
}

TEST_CASE("a random scorer on the {1, 2} task matches the analytic ratio") {
  // denominator draws 1 or 2 with equal probability, so the weighted ratio
  // over many replicas approaches 1 / E[latency of the top pick] = 1/1.5
  const int replicas = 10000;
  std::vector<TaskLabels> tasks;
  std::vector<std::vector<double>> scores;
  RngStream rng(163);
  for (int i = 0; i < replicas; ++i) {
    TaskLabels t;
    t.task = "t" + std::to_string(i);
    t.weight = 1;
    t.latencies = {1.0, 2.0};
    tasks.push_back(std::move(t));
    scores.push_back({rng.uniform_real(), rng.uniform_real()});
  }
  double v = top_k(make_dataset(tasks), scores, 1);
  CHECK(std::abs(v - 2.0 / 3.0) < 0.05);
}

TEST_CASE("tuning curve basics") {
  SUBCASE("single measurement yields a length-one constant series") {
    TuningCurve c = tuning_curve({{"t", 1, 5.0}});
    REQUIRE(c.aggregate.size() == 1);
    CHECK(c.aggregate[0] == 5.0);
    REQUIRE(c.per_task.size() == 1);
    CHECK(c.per_task[0].size() == 1);
  }
  SUBCASE("aggregate is non-increasing once every task is seen") {
    RngStream rng(167);
    std::vector<TrialOutcome> log;
    for (int i = 0; i < 200; ++i) {
      std::string task = rng.uniform_index(3) == 0 ? "a" : (rng.uniform_index(2) ? "b" : "c");
      log.push_back({task, 2, 1.0 + rng.uniform_real()});
    }
    TuningCurve c = tuning_curve(log);
    bool all_seen = false;
    for (std::size_t i = 1; i < c.aggregate.size(); ++i) {
      if (std::isfinite(c.aggregate[i - 1])) all_seen = true;
      if (all_seen) CHECK(c.aggregate[i] <= c.aggregate[i - 1]);
    }
    CHECK(all_seen);
  }
  SUBCASE("unvisited tasks keep the aggregate infinite") {
    TuningCurve c = tuning_curve({{"a", 1, 2.0}}, {{"a", 1}, {"b", 1}});
    CHECK(std::isinf(c.aggregate[0]));
    CHECK(!trials_to_target(c, 100.0));
  }
}

TEST_CASE("trials_to_target finds the first crossing") {
  std::vector<TrialOutcome> log{
      {"a", 1, 10.0}, {"a", 1, 6.0}, {"a", 1, 7.0}, {"a", 1, 2.0}, {"a", 1, 1.0}};
  TuningCurve c = tuning_curve(log);
  CHECK(trials_to_target(c, 10.0) == 1);
  CHECK(trials_to_target(c, 6.0) == 2);
  CHECK(trials_to_target(c, 2.5) == 4);
  CHECK(!trials_to_target(c, 0.5));
}

TEST_CASE("curve CSV lists every trial with running bests") {
  std::vector<TrialOutcome> log{{"a", 2, 4.0}, {"b", 1, 2.0}, {"a", 2, 3.0}};
  std::string csv = curve_to_csv(tuning_curve(log));
  CHECK(csv.rfind("trial,aggregate,a,b\n", 0) == 0);
  // three data rows plus the header
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  // the final aggregate is 2*3 + 1*2
  CHECK(csv.find("3,8,3,2\n") != std::string::npos);
}

TEST_CASE("one-sided sign test closed values") {
  CHECK(sign_test_p(0, 10) == doctest::Approx(1.0));
  CHECK(sign_test_p(10, 10) == doctest::Approx(1.0 / 1024.0));
  CHECK(sign_test_p(9, 10) == doctest::Approx(11.0 / 1024.0));
  CHECK(sign_test_p(8, 10) == doctest::Approx(56.0 / 1024.0));
  CHECK(sign_test_p(10, 12) == doctest::Approx((66.0 + 12.0 + 1.0) / 4096.0));
}
