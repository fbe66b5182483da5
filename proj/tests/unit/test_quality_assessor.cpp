#include <doctest.h>

#include <boost/math/distributions/binomial.hpp>
#include <cmath>
#include <map>

#include "ea/errors.hpp"
#include "ea/quality_assessor.hpp"
#include "toy_data.hpp"

using namespace ea;

namespace {

// Predicts the raw value of column x.
class IdentityPredictor final : public Predictor {
 public:
  std::string kind() const override { return "identity"; }
  TaskKind task() const override { return TaskKind::regression; }
  std::vector<double> predict(const Dataset& d, std::span<const std::size_t> rows) const override {
    std::vector<double> out;
    for (auto r : rows) out.push_back(d.column("x").numbers[r]);
    return out;
  }
};

// Spends a fixed amount of arithmetic on every row.
class FixedCostPredictor final : public Predictor {
 public:
  std::string kind() const override { return "fixed_cost"; }
  TaskKind task() const override { return TaskKind::regression; }
  std::vector<double> predict(const Dataset& d, std::span<const std::size_t> rows) const override {
    std::vector<double> out;
    for (auto r : rows) {
      volatile double acc = d.column("x").numbers[r];
      for (int k = 0; k < 2000; ++k) acc = acc * 0.999999 + 1e-9;
      out.push_back(static_cast<double>(acc));
    }
    return out;
  }
};

double train_mean(const Dataset& d, const std::string& col) {
  double s = 0;
  for (auto r : d.train) s += d.column(col).numbers[r];
  return s / static_cast<double>(d.train.size());
}

std::string train_mode(const Dataset& d, const std::string& col) {
  std::map<std::string, int> counts;
  for (auto r : d.train) ++counts[d.column(col).labels[r]];
  std::string best;
  int n = -1;
  for (const auto& [k, c] : counts) {
    if (c > n) {
      best = k;
      n = c;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("degradation sign conventions") {
  CHECK(degradation_pct(TaskKind::classification, 0.8, 0.6) == doctest::Approx(25.0));
  CHECK(degradation_pct(TaskKind::regression, 2.0, 3.0) == doctest::Approx(50.0));
  CHECK(degradation_pct(TaskKind::regression, 0.0, 3.0) == 0.0);
}

TEST_CASE("zero-level perturbations leave the metric unchanged") {
  const Dataset d = testing::mixed_classification();
  const auto model = fit_reference(d, "logistic", 0);
  const auto cells = robustness_suite(*model, d, {{PerturbKind::gaussian_noise, 0.0}, {PerturbKind::missingness, 0.0}}, 5);
  for (const auto& c : cells) {
    CHECK(c.degradation_pct == 0.0);
    CHECK(c.perturbed == c.base);
  }
  std::size_t removed = 99;
  const Dataset same = perturb(d, {PerturbKind::missingness, 0.0, 1, {}}, &removed);
  CHECK(removed == 0);
  CHECK(dataset_hash(same) == dataset_hash(d));
}

TEST_CASE("noise degradation grows strictly with level on the single-feature fixture") {
  const Dataset d = testing::single_feature_regression();
  const IdentityPredictor identity;
  const auto ridge = fit_reference(d, "ridge", 0);
  const std::vector<double> levels{0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::vector<GridCell> grid;
    for (double l : levels) grid.push_back({PerturbKind::gaussian_noise, l});
    for (const Predictor* p : {static_cast<const Predictor*>(&identity), static_cast<const Predictor*>(ridge.get())}) {
      const auto cells = robustness_suite(*p, d, grid, seed);
      CAPTURE(seed);
      CAPTURE(p->kind());
      CHECK(cells.front().degradation_pct > 0.0);
      for (std::size_t i = 1; i < cells.size(); ++i) CHECK(cells[i].degradation_pct > cells[i - 1].degradation_pct);
    }
  }
}

TEST_CASE("noise only touches numeric test cells, scaled by the train std") {
  const Dataset d = testing::single_feature_regression();
  const Dataset a = perturb(d, {PerturbKind::gaussian_noise, 0.1, 3, {}});
  const Dataset b = perturb(d, {PerturbKind::gaussian_noise, 0.1, 3, {}});
  CHECK(dataset_hash(a) == dataset_hash(b));
  for (auto r : d.train) CHECK(a.column("x").numbers[r] == d.column("x").numbers[r]);
  // With common random numbers, doubling the level doubles every displacement.
  const Dataset c = perturb(d, {PerturbKind::gaussian_noise, 0.2, 3, {}});
  double sq = 0;
  for (auto r : d.test) {
    const double da = a.column("x").numbers[r] - d.column("x").numbers[r];
    const double dc = c.column("x").numbers[r] - d.column("x").numbers[r];
    CHECK(dc == doctest::Approx(2.0 * da).epsilon(1e-9));
    sq += da * da;
  }
  double m = train_mean(d, "x"), ss = 0;
  for (auto r : d.train) ss += (d.column("x").numbers[r] - m) * (d.column("x").numbers[r] - m);
  const double sd = std::sqrt(ss / static_cast<double>(d.train.size() - 1));
  const double realized = std::sqrt(sq / static_cast<double>(d.test.size()));
  CHECK(realized == doctest::Approx(0.1 * sd).epsilon(0.25));
}

TEST_CASE("missingness at rate one collapses test cells to the train imputation") {
  const Dataset d = testing::mixed_classification();
  std::size_t removed = 0;
  const Dataset p = perturb(d, {PerturbKind::missingness, 1.0, 0, {}}, &removed);
  CHECK(removed == d.test.size() * d.columns.size());
  const double mean_a = train_mean(d, "a");
  const std::string mode_c = train_mode(d, "c");
  for (auto r : d.test) {
    CHECK(p.column("a").numbers[r] == doctest::Approx(mean_a).epsilon(1e-12));
    CHECK(p.column("c").labels[r] == mode_c);
  }
  for (auto r : d.train) {
    CHECK(p.column("a").numbers[r] == d.column("a").numbers[r]);
    CHECK(p.column("c").labels[r] == d.column("c").labels[r]);
  }
}

TEST_CASE("missingness removals follow the rate") {
  const Dataset d = testing::mixed_classification(2000);
  const double cells = static_cast<double>(d.test.size() * d.columns.size());
  std::size_t prev = 0;
  for (double level : {0.1, 0.2, 0.3}) {
    std::size_t removed = 0;
    (void)perturb(d, {PerturbKind::missingness, level, 8, {}}, &removed);
    // Exact binomial 99% interval, rounding outward to whole cells.
    const boost::math::binomial_distribution<double> b(cells, level);
    const double lo = std::floor(boost::math::quantile(b, 0.005));
    const double hi = std::ceil(boost::math::quantile(boost::math::complement(b, 0.005)));
    CAPTURE(level);
    CAPTURE(removed);
    CHECK(static_cast<double>(removed) >= lo);
    CHECK(static_cast<double>(removed) <= hi);
    CHECK(removed >= prev);
    prev = removed;
  }
  std::size_t only_a = 0;
  (void)perturb(d, {PerturbKind::missingness, 1.0, 8, {"a"}}, &only_a);
  CHECK(only_a == d.test.size());
}

TEST_CASE("perturbation argument checks") {
  const Dataset d = testing::mixed_classification();
  CHECK_THROWS_AS(perturb(d, {PerturbKind::gaussian_noise, 1.5, 0, {}}), SpecError);
  CHECK_THROWS_AS(perturb(d, {PerturbKind::missingness, -0.1, 0, {}}), SpecError);
  Dataset cats = d;
  cats.columns.erase(cats.columns.begin(), cats.columns.begin() + 2);
  CHECK_THROWS_AS(perturb(cats, {PerturbKind::gaussian_noise, 0.1, 0, {}}), SpecError);
  CHECK(parse_perturb_kind(to_string(PerturbKind::missingness)) == PerturbKind::missingness);
}

TEST_CASE("preprocessing statistics ignore test rows") {
  Dataset d = testing::mixed_classification();
  const auto before = fit_preprocessor(d, d.train, "standard_scale", "impute_mean");
  for (auto r : d.test) {
    d.column("a").numbers[r] = 1e6;
    d.column("c").labels[r] = "zzz";
  }
  const auto after = fit_preprocessor(d, d.train, "standard_scale", "impute_mean");
  CHECK(before.center == after.center);
  CHECK(before.scale == after.scale);
  CHECK(before.fill == after.fill);
  CHECK(before.mode == after.mode);
}

TEST_CASE("single-class test split omits the auc with a warning") {
  Dataset d = testing::mixed_classification();
  for (auto r : d.test) d.target[r] = 1.0;
  const std::vector<double> scores(d.test.size(), 0.7);
  const auto m = task_metrics(d, scores);
  CHECK(m.values.count("auc") == 0);
  CHECK(m.values.at("accuracy") == 1.0);
  REQUIRE(m.warnings.size() == 1);
  CHECK(m.warnings[0] == "auc_undefined_single_class");
}

TEST_CASE("full assessment is deterministic and skips fairness for regression") {
  const Dataset d = testing::mixed_classification();
  const auto model = fit_reference(d, "gbt_stumps", 0);
  AssessOptions opt;
  opt.efficiency = false;
  const auto a = to_json(assess_model(*model, d, opt));
  const auto b = to_json(assess_model(*model, d, opt));
  CHECK(a == b);
  CHECK(a.at("fairness").contains("sex"));
  CHECK(a.at("robustness").size() == default_grid().size());

  const Dataset r = testing::single_feature_regression();
  CHECK_THROWS_AS(fairness_metrics(*fit_reference(r, "ridge", 0), r, "x"), SpecError);
  CHECK_THROWS_AS(fairness_metrics(*model, d, "nope"), SpecError);
}

TEST_CASE("efficiency reports a positive throughput") {
  const Dataset d = testing::mixed_classification();
  const auto model = fit_reference(d, "logistic", 0);
  const auto e = efficiency(*model, d, 3);
  CHECK(e.throughput > 0.0);
  CHECK(e.batch_rows >= d.test.size());
  CHECK(e.repeats == 3);
}

TEST_CASE("throughput stays flat when the test split doubles") {
  const FixedCostPredictor p;
  const Dataset small = testing::single_feature_regression(400);
  const Dataset large = testing::single_feature_regression(800);
  REQUIRE(large.test.size() == 2 * small.test.size());
  const double a = efficiency(p, small, 9).throughput;
  const double b = efficiency(p, large, 9).throughput;
  CAPTURE(a);
  CAPTURE(b);
  CHECK(b / a >= 0.75);
  CHECK(b / a <= 1.25);
}

TEST_CASE("reference learner limits") {
  // Separable on a: the logistic fit reaches full train accuracy.
  Dataset d;
  d.name = "separable";
  std::vector<double> a;
  for (int i = 0; i < 80; ++i) {
    a.push_back(i < 40 ? -1.0 - i * 0.01 : 1.0 + i * 0.01);
    d.target.push_back(i < 40 ? 0.0 : 1.0);
  }
  d.columns.push_back(testing::numeric_column("a", a));
  assign_split(d, 0.25, 0);
  const auto logit = fit_reference(d, "logistic", 0);
  const auto train_scores = logit->predict(d, d.train);
  for (std::size_t i = 0; i < d.train.size(); ++i) {
    CHECK((train_scores[i] >= 0.5 ? 1.0 : 0.0) == d.target[d.train[i]]);
  }
  CHECK(fit_reference(d, "logistic", 0)->predict(d, d.test) == logit->predict(d, d.test));

  // A huge ridge penalty shrinks every prediction to the train-target mean.
  const Dataset r = testing::single_feature_regression();
  double mean = 0;
  for (auto i : r.train) mean += r.target[i] / static_cast<double>(r.train.size());
  PipelineSpec spec;
  spec.model = "fit_ridge";
  spec.model_params = {{"alpha", 1e12}};
  for (double v : fit_pipeline(r, spec, 0)->predict(r, r.test)) CHECK(v == doctest::Approx(mean).epsilon(1e-6));

  Dataset flat = d;
  std::fill(flat.target.begin(), flat.target.end(), 1.0);
  CHECK_THROWS_AS(fit_reference(flat, "logistic", 0), FitError);
  CHECK_THROWS_AS(fit_reference(r, "logistic", 0), FitError);
}

TEST_CASE("single occupied calibration bin") {
  const std::vector<double> y{1, 0, 1, 0}, p{0.8, 0.8, 0.8, 0.8};
  CHECK(calibration_error(y, p, 10).ece == doctest::Approx(0.3));
}
