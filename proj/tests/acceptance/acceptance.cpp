// Acceptance gate: one PASS/FAIL line per criterion, each with its runtime budget.
// Usage: acceptance [DATA_DIR]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "ea/counterfactual.hpp"
#include "ea/decision_assessor.hpp"
#include "ea/harness.hpp"
#include "ea/metrics.hpp"
#include "ea/quality_assessor.hpp"
#include "ea/reasoning_validator.hpp"
#include "ea/report.hpp"
#include "ea/stats.hpp"
#include "oracles.hpp"
#include "toy_data.hpp"

using namespace ea;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string data_dir;

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

std::vector<Fixture> all_fixtures() {
  std::vector<Fixture> out;
  for (const auto& n : default_datasets()) out.push_back(load_fixture(data_dir, n));
  return out;
}

std::vector<std::uint64_t> seed_range(std::size_t n) {
  std::vector<std::uint64_t> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = i;
  return s;
}

Outcome detection_arithmetic() {
  Outcome o;
  const auto r = detection_report(68, 5, 7, 45);
  o.require(std::fabs(r.precision - 0.932) <= 0.001, fmt::format("precision {:.4f}", r.precision));
  o.require(std::fabs(r.recall - 0.907) <= 0.001, fmt::format("recall {:.4f}", r.recall));
  o.require(std::fabs(r.f1 - 0.919) <= 0.001, fmt::format("f1 {:.4f}", r.f1));
  if (o.pass) o.detail = fmt::format("P={:.3f} R={:.3f} F1={:.3f}", r.precision, r.recall, r.f1);
  return o;
}

Outcome detection_behavior() {
  Outcome o;
  const auto corpora = build_corpora(all_fixtures(), 0);
  AssessorConfig exact;
  exact.noise_sigma = 0.0;
  const DetectionRun run = run_detection(corpora, exact);
  o.require(run.overall.total() == 125, fmt::format("{} decisions", run.overall.total()));
  std::size_t critical = 0;
  for (std::size_t k = 0; k < corpora.size(); ++k) {
    for (const auto& f : run.per_dataset[k].second.findings) {
      const Label& truth = corpora[k].labels.at(f.decision_id);
      if (!truth.is_faulty) continue;
      if (is_critical(*truth.fault)) {
        ++critical;
        o.require(f.flagged && f.predicted_class == truth.fault, "critical fault missed: " + f.decision_id);
      }
      if (!f.flagged) {
        o.require(*truth.fault == FaultClass::subtle_encoding,
                  "false negative from " + std::string(to_string(*truth.fault)));
      }
    }
  }
  const AssessorConfig calibrated;
  const auto metrics = detection_multi_seed(corpora, calibrated, seed_range(500), 1);
  const auto& f1 = metrics.at("f1");
  const StatsSummary s = summarize(f1);
  const double width = s.pct_97_5 - s.pct_2_5;
  o.require(s.mean >= 0.872 && s.mean <= 0.918, fmt::format("mean F1 {:.4f}", s.mean));
  o.require(width <= 0.12, fmt::format("percentile width {:.4f}", width));
  if (o.pass) {
    o.detail = fmt::format("sigma 0: {} critical caught, FN {} all subtle; sigma {}: mean F1 {:.3f} [{:.3f}, {:.3f}]",
                           critical, run.overall.fn, calibrated.noise_sigma, s.mean, s.pct_2_5, s.pct_97_5);
  }
  return o;
}

Outcome reasoning_statistics() {
  Outcome o;
  const auto ci = wilson_interval(45, 60);
  const double lo = std::round(ci.low * 1000) / 1000, hi = std::round(ci.high * 1000) / 1000;
  o.require(std::fabs(lo - 0.628) < 1e-9 && std::fabs(hi - 0.842) < 1e-9, fmt::format("wilson [{}, {}]", lo, hi));
  const auto z = two_proportion_z(45.0 / 60, 60, 17.0 / 60, 60);
  o.require(z.p < 0.001, fmt::format("p {}", z.p));
  if (o.pass) o.detail = fmt::format("wilson [{:.3f}, {:.3f}], z={:.3f}, p={:.2e}", ci.low, ci.high, z.z, z.p);
  return o;
}

Outcome reasoning_behavior() {
  Outcome o;
  const Fixture fx = load_fixture(data_dir, "german_credit");
  const auto set = generate_snippet_set(fx.log.manifest, fx.log.decisions, 0);
  o.require(set.snippets.size() == 60, fmt::format("{} snippets", set.snippets.size()));
  std::vector<nlohmann::json> first;
  for (const auto& s : set.snippets) first.push_back(to_json(validate(s, fx.log.manifest, fx.log.decisions)));
  bool stable = true;
  for (int rep = 0; rep < 100 && stable; ++rep) {
    for (std::size_t i = 0; i < set.snippets.size(); ++i) {
      stable &= to_json(validate(set.snippets[i], fx.log.manifest, fx.log.decisions)) == first[i];
    }
  }
  o.require(stable, "verdicts changed across repeats");
  const auto rep = run_validation_suite(set.snippets, set.labels, fx.log.manifest, fx.log.decisions);
  for (const auto& [name, cmp] : rep.comparisons) {
    o.require(rep.accuracy > cmp.accuracy, fmt::format("EA {:.3f} <= {} {:.3f}", rep.accuracy, name, cmp.accuracy));
  }
  const auto& rule_fact = rep.comparisons.at("rule").per_category.at(SnippetLabel::hallucinated_fact);
  o.require(rule_fact.correct == 0, fmt::format("rule caught {} hallucinated facts", rule_fact.correct));
  std::size_t numeric = 0;
  for (const auto& [id, v] : rep.verdicts) {
    if (set.labels.at(id) != SnippetLabel::numerical_hallucination) continue;
    ++numeric;
    bool arithmetic = false;
    for (const auto& e : v.evidence) arithmetic |= e.ref.rfind("arithmetic:", 0) == 0;
    o.require(arithmetic, "no arithmetic failure for " + id);
  }
  if (o.pass) {
    o.detail = fmt::format("EA {:.3f} vs rule {:.3f} / stochastic {:.3f}; {} numeric plants fail arithmetic",
                           rep.accuracy, rep.comparisons.at("rule").accuracy,
                           rep.comparisons.at("stochastic").accuracy, numeric);
  }
  return o;
}

Outcome metric_oracles() {
  using namespace ea::testing;
  Outcome o;
  std::size_t sets = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto s = random_sample(8 + seed % 57, seed);
    ++sets;
    const auto fr = fairness(s.y, s.pred, s.group);
    const auto [dp, eo] = bf_fairness(s);
    const bool ok = close_rel(accuracy(s.y, s.pred), bf_accuracy(s)) && close_rel(f1_score(s.y, s.pred), bf_f1(s)) &&
                    close_rel(*auc(s.y, s.proba), bf_auc(s)) && close_rel(rmse(s.truth, s.value), bf_rmse(s)) &&
                    close_rel(mae(s.truth, s.value), bf_mae(s)) && close_rel(r2_score(s.truth, s.value), bf_r2(s)) &&
                    close_rel(calibration_error(s.y, s.proba).ece, bf_ece(s)) && close_rel(fr.dp, dp) &&
                    close_rel(fr.eo, eo);
    o.require(ok, fmt::format("oracle mismatch on seed {}", seed));
  }
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> y, p;
  for (int i = 0; i < 20000; ++i) {
    p.push_back(u(rng));
    y.push_back(u(rng) < p.back() ? 1.0 : 0.0);
  }
  const double ece = calibration_error(y, p, 10).ece;
  o.require(ece <= 0.02, fmt::format("calibrated ECE {:.4f}", ece));
  std::vector<double> yy, pred;
  std::vector<std::string> groups;
  for (const std::string g : {"x", "y"}) {
    for (int i = 0; i < 20; ++i) {
      yy.push_back(i % 2);
      pred.push_back(i % 5 == 0);
      groups.push_back(g);
    }
  }
  const double dp = fairness(yy, pred, groups).dp;
  o.require(dp == 0.0, fmt::format("independent DP {}", dp));
  if (o.pass) o.detail = fmt::format("{} random sets match brute force; calibrated ECE {:.4f}; DP 0", sets, ece);
  return o;
}

Outcome robustness_protocol() {
  Outcome o;
  const Dataset cls = testing::mixed_classification();
  const auto model = fit_reference(cls, "logistic", 0);
  for (const auto& c : robustness_suite(*model, cls, {{PerturbKind::gaussian_noise, 0.0}, {PerturbKind::missingness, 0.0}}, 1)) {
    o.require(c.degradation_pct == 0.0, fmt::format("zero-level {} degradation {}", to_string(c.kind), c.degradation_pct));
  }

  const Dataset reg = testing::single_feature_regression();
  const auto ridge = fit_reference(reg, "ridge", 0);
  const IdentityPredictor identity;
  std::vector<GridCell> grid;
  for (double l : {0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0}) grid.push_back({PerturbKind::gaussian_noise, l});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (const Predictor* p : {static_cast<const Predictor*>(&identity), static_cast<const Predictor*>(ridge.get())}) {
      const auto cells = robustness_suite(*p, reg, grid, seed);
      for (std::size_t i = 1; i < cells.size(); ++i) {
        o.require(cells[i].degradation_pct > cells[i - 1].degradation_pct,
                  fmt::format("{} seed {} not monotone at level {}", p->kind(), seed, cells[i].level));
      }
    }
  }

  const Dataset gone = perturb(cls, {PerturbKind::missingness, 1.0, 0, {}});
  double mean = 0;
  for (auto r : cls.train) mean += cls.column("a").numbers[r];
  mean /= static_cast<double>(cls.train.size());
  for (auto r : cls.test) {
    o.require(std::fabs(gone.column("a").numbers[r] - mean) <= 1e-12 * std::max(1.0, std::fabs(mean)),
              "missing column not at train mean");
  }
  if (o.pass) o.detail = fmt::format("zero level 0.0%; identity and ridge monotone over 7 levels x 20 seeds; rate 1.0 -> {:.4f}", mean);
  return o;
}

Outcome counterfactual_attribution() {
  Outcome o;
  for (const Dataset& d : {testing::mixed_classification(), testing::single_feature_regression()}) {
    StagePlan plan;
    plan.spec.model = d.task == TaskKind::classification ? "fit_logistic" : "fit_ridge";
    plan.decision_ids = {{Stage::data_preprocessing, "p"}, {Stage::feature_engineering, "f"},
                         {Stage::model_selection, "m"}};
    PipelineExecutor ex(d, 0);
    for (const auto& [stage, id] : plan.decision_ids) {
      const DecisionPoint pt{stage, id, 100.0};
      const auto control = reexecute(ex, plan, control_alternative(plan, pt));
      o.require(control.delta == 0.0, fmt::format("control delta {}", control.delta));
      for (const auto& alt : enumerate_alternatives(plan, pt, d, 3)) {
        const auto spec = apply_alternative(plan.spec, alt);
        o.require(ex.run(spec).metric == ex.run_full(spec).metric, "selective != full for " + alt.label());
      }
    }
  }
  const auto results =
      impacts_from_json(nlohmann::json::parse(read_file(data_dir + "/published_impacts.json")));
  const auto rep = attribute(results);
  o.require(rep.overall.n == 45, fmt::format("{} impacts", rep.overall.n));
  o.require(std::fabs(rep.overall.avg_abs_impact - 1.6) <= 0.05, fmt::format("avg {}", rep.overall.avg_abs_impact));
  o.require(std::fabs(rep.overall.min + 4.9) <= 0.05 && std::fabs(rep.overall.max - 8.3) <= 0.05,
            fmt::format("range [{}, {}]", rep.overall.min, rep.overall.max));
  if (o.pass) {
    o.detail = fmt::format("control 0; selective == full; published avg {:.3f}, range [{}, {}]",
                           rep.overall.avg_abs_impact, rep.overall.min, rep.overall.max);
  }
  return o;
}

Outcome variance_ranking() {
  Outcome o;
  const auto ranks = simulation_rankings(default_impact_params(), 15, seed_range(500), 1);
  const auto agree = std::count(ranks.begin(), ranks.end(), true);
  o.require(agree >= 499, fmt::format("{}/500", agree));
  if (o.pass) o.detail = fmt::format("ranking held in {}/500 runs", agree);
  return o;
}

Outcome overhead() {
  Outcome o;
  HarnessConfig cfg;
  cfg.data_dir = data_dir;
  const Fixture fx = load_fixture(data_dir, "adult_income");
  const auto rep = bench_overhead(fx, cfg, 10, 3, true, "gbt_stumps");
  double qa = 0;
  for (const auto& c : rep.components) {
    if (c.name == "quality_assessor") qa = c.share_pct;
  }
  o.require(rep.components.size() == 4, "components missing");
  o.require(qa >= 90.0, fmt::format("quality assessor share {:.2f}%", qa));
  const auto ratios = reference_ratios(91.85);
  o.require(std::fabs(ratios.at("300") - 0.031) <= 0.001 && std::fabs(ratios.at("600") - 0.015) <= 0.001 &&
                std::fabs(ratios.at("3600") - 0.003) <= 0.001,
            "reference ratios off");
  if (o.pass) {
    o.detail = fmt::format("quality assessor {:.1f}% of {:.2f} ms; 91.85 ms -> {:.3f}%/{:.3f}%/{:.3f}%", qa,
                           rep.total_ms, ratios.at("300"), ratios.at("600"), ratios.at("3600"));
  }
  return o;
}

Outcome determinism() {
  Outcome o;
  HarnessConfig cfg;
  cfg.data_dir = data_dir;
  HarnessConfig sim = cfg;
  sim.counterfactual_mode = "simulate";
  const std::vector<std::pair<ExperimentSpec, HarnessConfig>> suite{
      {{1, {}, seed_range(500), nlohmann::json::object()}, cfg},
      {{2, {}, {}, nlohmann::json::object()}, cfg},
      {{3, {}, {}, nlohmann::json::object()}, cfg},
      {{4, {}, {}, nlohmann::json::object()}, cfg},
      {{4, {}, seed_range(500), nlohmann::json::object()}, sim},
  };
  std::size_t bytes = 0;
  for (const auto& [spec, c] : suite) {
    const std::string a = emit_report(run_experiment(spec, c), ReportFormat::json);
    const std::string b = emit_report(run_experiment(spec, c), ReportFormat::json);
    o.require(a == b, fmt::format("exp{} differs between runs", spec.id));
    bytes += a.size();
  }
  if (o.pass) o.detail = fmt::format("5 reports, {} bytes, identical across two runs", bytes);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  data_dir = argc > 1 ? argv[1] : default_data_dir();
  const std::vector<Criterion> criteria{
      {1, "detection arithmetic", 1, detection_arithmetic},
      {2, "detection behavior", 30, detection_behavior},
      {3, "reasoning statistics", 1, reasoning_statistics},
      {4, "reasoning behavior", 5, reasoning_behavior},
      {5, "metric oracles", 10, metric_oracles},
      {6, "robustness protocol", 60, robustness_protocol},
      {7, "counterfactual attribution", 30, counterfactual_attribution},
      {8, "variance ranking", 10, variance_ranking},
      {9, "overhead benchmark", 60, overhead},
      {10, "determinism", 300, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) o.require(false, fmt::format("took {:.2f} s, budget {} s", secs, c.budget_s));
    failed += !o.pass;
    std::printf("%s  AC%-2d %-27s %7.3f s  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
