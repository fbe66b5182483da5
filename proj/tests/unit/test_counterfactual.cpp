#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "ea/counterfactual.hpp"
#include "ea/errors.hpp"
#include "ea/harness.hpp"
#include "toy_data.hpp"

using namespace ea;

namespace {

StagePlan toy_plan(const Dataset& d) {
  StagePlan plan;
  plan.spec.model = d.task == TaskKind::classification ? "fit_logistic" : "fit_ridge";
  plan.decision_ids = {{Stage::data_preprocessing, "p1"}, {Stage::feature_engineering, "f1"},
                       {Stage::model_selection, "m1"}};
  return plan;
}

DecisionPoint point(Stage s, const StagePlan& plan) { return {s, plan.decision_ids.at(s), 100.0}; }

nlohmann::json published() {
  return nlohmann::json::parse(read_file(std::string(EA_TEST_DATA_DIR) + "/published_impacts.json"));
}

}  // namespace

TEST_CASE("control counterfactual has zero delta") {
  for (const Dataset& d : {testing::mixed_classification(), testing::single_feature_regression()}) {
    const StagePlan plan = toy_plan(d);
    PipelineExecutor ex(d, 0);
    for (Stage s : {Stage::data_preprocessing, Stage::feature_engineering, Stage::model_selection}) {
      const auto r = reexecute(ex, plan, control_alternative(plan, point(s, plan)));
      CHECK(r.feasible);
      CHECK(r.delta == 0.0);
      CHECK(r.metric_alternative == r.metric_original);
    }
  }
}

TEST_CASE("selective re-execution matches a full run") {
  const Dataset d = testing::mixed_classification();
  const StagePlan plan = toy_plan(d);
  PipelineExecutor ex(d, 7);
  (void)ex.run(plan.spec);
  for (Stage s : {Stage::data_preprocessing, Stage::feature_engineering, Stage::model_selection}) {
    for (const auto& alt : enumerate_alternatives(plan, point(s, plan), d, 3)) {
      const PipelineSpec spec = apply_alternative(plan.spec, alt);
      const auto sel = ex.run(spec);
      const auto full = ex.run_full(spec);
      CAPTURE(alt.label());
      CHECK(sel.metric == full.metric);
      CHECK(sel.scores == full.scores);
      CHECK(sel.preprocessing_hash == full.preprocessing_hash);
      CHECK(sel.features_hash == full.features_hash);
    }
  }
}

TEST_CASE("upstream artifacts are reused") {
  const Dataset d = testing::mixed_classification();
  const StagePlan plan = toy_plan(d);
  PipelineExecutor ex(d, 0);
  const auto base = ex.run(plan.spec);
  CHECK(base.executed == std::array<bool, 3>{true, true, true});

  for (const auto& alt : enumerate_alternatives(plan, point(Stage::model_selection, plan), d, 3)) {
    const auto r = ex.run(apply_alternative(plan.spec, alt));
    CHECK(r.executed == std::array<bool, 3>{false, false, true});
    CHECK(r.preprocessing_hash == base.preprocessing_hash);
    CHECK(r.features_hash == base.features_hash);
  }
  for (const auto& alt : enumerate_alternatives(plan, point(Stage::feature_engineering, plan), d, 3)) {
    const auto r = ex.run(apply_alternative(plan.spec, alt));
    CHECK(r.executed == std::array<bool, 3>{false, true, true});
    CHECK(r.preprocessing_hash == base.preprocessing_hash);
  }
}

TEST_CASE("target encoding beats one-hot on a high-cardinality code") {
  const Dataset d = testing::high_cardinality_classification();
  StagePlan plan = toy_plan(d);
  plan.spec.model = "fit_gbt";
  plan.spec.model_params = {{"n_estimators", 10.0}, {"learning_rate", 0.3}};
  PipelineExecutor ex(d, 0);
  AlternativeDecision alt{point(Stage::feature_engineering, plan), "target_encode",
                          {{"cv_folds", 5.0}, {"smoothing", 10.0}}};
  const auto r = reexecute(ex, plan, alt);
  REQUIRE(r.feasible);
  CHECK(r.delta > 0.0);
  CHECK(r.metric_alternative > 0.8);
}

TEST_CASE("alternatives respect task and schema") {
  const Dataset reg = testing::single_feature_regression();
  const StagePlan plan = toy_plan(reg);
  const auto models = enumerate_alternatives(plan, point(Stage::model_selection, plan), reg, 4);
  for (const auto& a : models) CHECK(a.action != "fit_logistic");
  // No categorical column: target encoding has nothing to encode.
  for (const auto& a : enumerate_alternatives(plan, point(Stage::feature_engineering, plan), reg, 4)) {
    CHECK(a.action != "target_encode");
    CHECK(a.action != "one_hot_encode");
  }
  const auto pre = enumerate_alternatives(plan, point(Stage::data_preprocessing, plan), reg, 10);
  CHECK(pre.size() == 5);
  for (const auto& a : pre) CHECK(a.action != "standard_scale+impute_mean");
}

TEST_CASE("fit failures are reported as infeasible") {
  const Dataset d = testing::mixed_classification();
  const StagePlan plan = toy_plan(d);
  PipelineExecutor ex(d, 0);
  const auto r = reexecute(ex, plan, {point(Stage::model_selection, plan), "fit_deep_mlp", {}});
  CHECK_FALSE(r.feasible);
  CHECK(r.explanation.rfind("infeasible", 0) == 0);
}

TEST_CASE("decision points rank by audit risk with stage-order ties") {
  const Dataset d = testing::mixed_classification();
  const StagePlan plan = toy_plan(d);
  auto pts = identify_points(plan, {}, 3);
  REQUIRE(pts.size() == 3);
  CHECK(pts[0].stage == Stage::data_preprocessing);
  CHECK(pts[2].stage == Stage::model_selection);

  AuditFinding f;
  f.decision_id = "m1";
  f.flagged = true;
  f.scores.risk = 20;
  const std::vector<AuditFinding> findings{f};
  pts = identify_points(plan, findings, 3);
  CHECK(pts[0].stage == Stage::model_selection);
  CHECK(identify_points(plan, findings, 1).size() == 1);
  CHECK_THROWS_AS(identify_points(StagePlan{}, findings, 3), PlanError);
  CHECK_THROWS_AS(plan_from_log(RunLog{}), PlanError);
}

TEST_CASE("plan recovered from a fixture log") {
  const Fixture fx = load_fixture(EA_TEST_DATA_DIR, "german_credit");
  const StagePlan plan = plan_from_log(fx.log);
  CHECK(plan.decision_ids.size() == 3);
  CHECK(plan.spec.imputer == "impute_median");
  CHECK(plan.spec.scaler == "standard_scale");
}

TEST_CASE("impact sign is uniform") {
  CHECK(impact(MetricKind::accuracy, 0.70, 0.72) == doctest::Approx(2.0));
  CHECK(impact(MetricKind::rmse, 2.0, 1.8) == doctest::Approx(10.0));
  CHECK(impact(MetricKind::rmse, 2.0, 2.2) == doctest::Approx(-10.0));
}

TEST_CASE("attribution of the published impacts") {
  const auto j = published();
  const auto results = impacts_from_json(j);
  REQUIRE(results.size() == 45);
  const auto rep = attribute(results);

  // Recount straight from the raw JSON.
  double abs_sum = 0, lo = 1e9, hi = -1e9;
  std::map<std::string, std::pair<double, int>> stage;
  for (const auto& row : j) {
    const double v = row.at("impact").get<double>();
    abs_sum += std::fabs(v);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    stage[row.at("stage").get<std::string>()].first += std::fabs(v);
    stage[row.at("stage").get<std::string>()].second += 1;
  }
  CHECK(rep.overall.n == 45);
  CHECK(rep.overall.avg_abs_impact == doctest::Approx(abs_sum / 45).epsilon(1e-12));
  CHECK(rep.overall.min == lo);
  CHECK(rep.overall.max == hi);
  for (const auto& [name, acc] : stage) {
    CHECK(rep.per_stage.at(name).n == static_cast<std::size_t>(acc.second));
    CHECK(rep.per_stage.at(name).avg_abs_impact == doctest::Approx(acc.first / acc.second).epsilon(1e-12));
  }
  CHECK(std::fabs(rep.overall.avg_abs_impact - 1.6) <= 0.05);
  CHECK(rep.overall.min == doctest::Approx(-4.9));
  CHECK(rep.overall.max == doctest::Approx(8.3));
  CHECK(stage_ranking(rep) == std::vector<std::string>{"model_selection", "feature_engineering", "preprocessing"});

  auto shuffled = results;
  std::mt19937_64 rng(3);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  CHECK(to_json(attribute(shuffled)) == to_json(rep));
  CHECK(attribute(std::vector<CounterfactualResult>{results[4]}).overall.avg_abs_impact == std::fabs(results[4].delta));
  CHECK_THROWS_AS(attribute(std::vector<CounterfactualResult>{}), ArgError);
}

TEST_CASE("simulation mode") {
  auto params = default_impact_params();
  const auto draws = simulate_impacts(params, 2000, 1);
  std::map<Stage, std::pair<double, int>> acc;
  for (const auto& r : draws) {
    acc[r.point.stage].first += r.delta;
    acc[r.point.stage].second += 1;
    CHECK(r.mode == CfMode::simulation);
  }
  for (const auto& [s, p] : params) {
    const double mean = acc[s].first / acc[s].second;
    CHECK(std::fabs(mean - p.mu) <= 3 * p.sigma / std::sqrt(2000.0));
  }
  for (auto& [s, p] : params) p.sigma = 0.0;
  for (const auto& r : simulate_impacts(params, 5, 9)) CHECK(r.delta == params.at(r.point.stage).mu);

  std::vector<std::uint64_t> seeds(500);
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = i;
  const auto ranks = simulation_rankings(default_impact_params(), 15, seeds, 1);
  CHECK(std::count(ranks.begin(), ranks.end(), true) >= 499);
}

TEST_CASE("parallel arms give the same results as serial ones") {
  const Fixture fx = load_fixture(EA_TEST_DATA_DIR, "titanic");
  CounterfactualOptions serial, parallel;
  parallel.threads = 3;
  const auto a = run_counterfactuals(fx.data, fx.log, {}, serial);
  const auto b = run_counterfactuals(fx.data, fx.log, {}, parallel);
  REQUIRE(a.size() == 9);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(to_json(a[i]) == to_json(b[i]));
}
