// Metrics against brute-force recomputation on small random sets.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "ea/errors.hpp"
#include "ea/metrics.hpp"
#include "oracles.hpp"

using namespace ea;
using namespace ea::testing;

TEST_CASE("metrics match brute force on small random sets") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const std::size_t n = 8 + seed % 57;  // 8..64 rows
    const OracleSample s = random_sample(n, seed);
    CAPTURE(seed);
    CHECK(close_rel(accuracy(s.y, s.pred), bf_accuracy(s)));
    CHECK(close_rel(f1_score(s.y, s.pred), bf_f1(s)));
    REQUIRE(auc(s.y, s.proba).has_value());
    CHECK(close_rel(*auc(s.y, s.proba), bf_auc(s)));
    CHECK(close_rel(rmse(s.truth, s.value), bf_rmse(s)));
    CHECK(close_rel(mae(s.truth, s.value), bf_mae(s)));
    CHECK(close_rel(r2_score(s.truth, s.value), bf_r2(s)));
    CHECK(close_rel(calibration_error(s.y, s.proba, 10).ece, bf_ece(s)));
    const auto fr = fairness(s.y, s.pred, s.group);
    const auto [dp, eo] = bf_fairness(s);
    CHECK(close_rel(fr.dp, dp));
    CHECK(close_rel(fr.eo, eo));
  }
}

TEST_CASE("metrics are invariant to row order") {
  const OracleSample s = random_sample(48, 99);
  std::vector<std::size_t> perm(s.y.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(1);
  std::shuffle(perm.begin(), perm.end(), rng);
  OracleSample t;
  for (auto i : perm) {
    t.y.push_back(s.y[i]);
    t.proba.push_back(s.proba[i]);
    t.pred.push_back(s.pred[i]);
    t.value.push_back(s.value[i]);
    t.truth.push_back(s.truth[i]);
    t.group.push_back(s.group[i]);
  }
  CHECK(accuracy(s.y, s.pred) == accuracy(t.y, t.pred));
  CHECK(*auc(s.y, s.proba) == *auc(t.y, t.proba));
  CHECK(calibration_error(s.y, s.proba).ece == doctest::Approx(calibration_error(t.y, t.proba).ece).epsilon(1e-12));
  CHECK(fairness(s.y, s.pred, s.group).dp == fairness(t.y, t.pred, t.group).dp);
  CHECK(fairness(s.y, s.pred, s.group).eo == fairness(t.y, t.pred, t.group).eo);
}

TEST_CASE("demographic parity is symmetric in group labels and zero for independent predictions") {
  const OracleSample s = random_sample(60, 4);
  std::vector<std::string> swapped;
  for (const auto& g : s.group) swapped.push_back(g == "a" ? "b" : (g == "b" ? "a" : g));
  CHECK(fairness(s.y, s.pred, s.group).dp == fairness(s.y, s.pred, swapped).dp);

  // Every group receives the same predictions, so positive rates coincide.
  std::vector<double> y, pred;
  std::vector<std::string> groups;
  for (const std::string g : {"x", "y", "z"}) {
    for (int i = 0; i < 10; ++i) {
      y.push_back(i % 2);
      pred.push_back(i < 4 ? 1.0 : 0.0);
      groups.push_back(g);
    }
  }
  CHECK(fairness(y, pred, groups).dp == 0.0);
  CHECK(fairness(y, pred, groups).eo == 0.0);
}

TEST_CASE("calibrated probabilities give a small ECE") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> y, p;
  for (int i = 0; i < 20000; ++i) {
    p.push_back(u(rng));
    y.push_back(u(rng) < p.back() ? 1.0 : 0.0);
  }
  CHECK(calibration_error(y, p, 10).ece <= 0.02);
}

TEST_CASE("metric edge cases") {
  const std::vector<double> ones{1, 1, 1};
  CHECK_FALSE(auc(ones, std::vector<double>{0.2, 0.5, 0.9}).has_value());
  CHECK(f1_score(std::vector<double>{0, 0}, std::vector<double>{0, 0}) == 0.0);
  CHECK(r2_score(ones, ones) == 1.0);
  CHECK(r2_score(ones, std::vector<double>{1, 1, 2}) == 0.0);
  CHECK_THROWS_AS(fairness(ones, ones, std::vector<std::string>{"a", "a", "a"}), SpecError);
  CHECK(threshold_labels(std::vector<double>{0.49, 0.5, 0.9}) == std::vector<double>{0, 1, 1});
}

TEST_CASE("four-point regression by hand") {
  const std::vector<double> y{1, 2, 3, 4}, p{1.5, 2, 2.5, 5};
  // residuals -0.5, 0, 0.5, -1: SSE 1.5, SST 5
  CHECK(rmse(y, p) == doctest::Approx(std::sqrt(1.5 / 4)));
  CHECK(mae(y, p) == doctest::Approx(2.0 / 4));
  CHECK(r2_score(y, p) == doctest::Approx(1.0 - 1.5 / 5));
}
