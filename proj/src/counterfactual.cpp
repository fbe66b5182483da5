#include "ea/counterfactual.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "ea/errors.hpp"
#include "ea/seeding.hpp"

namespace ea {

namespace {

constexpr Stage kPlanStages[] = {Stage::data_preprocessing, Stage::feature_engineering, Stage::model_selection};

bool is_feature_stage_action(std::string_view a) {
  return a == "one_hot_encode" || a == "target_encode" || a == "select_top_k" || a == "poly_features";
}

bool is_model_action(std::string_view a) {
  return a == "fit_logistic" || a == "fit_ridge" || a == "fit_gbt" || a == "fit_deep_mlp";
}

std::string stage_key(Stage s) {
  switch (s) {
    case Stage::data_preprocessing:
      return "preprocessing";
    case Stage::feature_engineering:
      return "feature_engineering";
    case Stage::model_selection:
      return "model_selection";
    case Stage::hyperparameter_opt:
      return "hyperparameter_opt";
  }
  return "unknown";
}

Stage stage_from_key(const std::string& s) {
  if (s == "preprocessing") return Stage::data_preprocessing;
  if (auto st = parse_stage(s)) return *st;
  throw SchemaError("stage", "unknown stage '" + s + "'");
}

std::map<std::string, Scalar> numeric_params(const DecisionRecord& r, std::initializer_list<std::string_view> keys) {
  std::map<std::string, Scalar> out;
  for (auto k : keys) {
    if (auto v = r.number_param(k)) out[std::string(k)] = *v;
  }
  return out;
}

bool has_kind(const Dataset& d, bool categorical) {
  return std::any_of(d.columns.begin(), d.columns.end(),
                     [&](const Column& c) { return categorical ? !c.is_numeric() : c.is_numeric(); });
}

ImpactStats stats_of(const std::vector<double>& v) {
  ImpactStats s;
  s.n = v.size();
  if (v.empty()) return s;
  // Sorted summation keeps the aggregate independent of result order.
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  double abs_sum = 0.0, sum = 0.0;
  std::vector<double> abs_sorted;
  for (double x : sorted) abs_sorted.push_back(std::fabs(x));
  std::sort(abs_sorted.begin(), abs_sorted.end());
  for (double x : abs_sorted) abs_sum += x;
  for (double x : sorted) sum += x;
  s.avg_abs_impact = abs_sum / static_cast<double>(v.size());
  s.mean_impact = sum / static_cast<double>(v.size());
  s.min = sorted.front();
  s.max = sorted.back();
  return s;
}

}  // namespace

StagePlan plan_from_log(const RunLog& log) {
  if (log.decisions.empty()) throw PlanError("decision log is empty; no stage plan to recover");
  StagePlan plan;
  plan.spec.model = log.manifest.task == TaskKind::regression ? "fit_ridge" : "fit_logistic";
  const DecisionRecord* scaler = nullptr;
  const DecisionRecord* imputer = nullptr;
  const DecisionRecord* features = nullptr;
  const DecisionRecord* model = nullptr;
  const DecisionRecord* any_model = nullptr;
  for (const auto& r : log.decisions) {
    if (!scaler && (r.action == "standard_scale" || r.action == "minmax_scale")) scaler = &r;
    if (!imputer && (r.action == "impute_mean" || r.action == "impute_median")) imputer = &r;
    if (!features && is_feature_stage_action(r.action)) features = &r;
    if (!model && is_model_action(r.action) && r.stage == Stage::model_selection) model = &r;
    if (!any_model && is_model_action(r.action)) any_model = &r;
  }
  if (!model) model = any_model;
  if (scaler) plan.spec.scaler = scaler->action;
  if (imputer) plan.spec.imputer = imputer->action;
  const DecisionRecord* pre = scaler ? scaler : imputer;
  plan.decision_ids[Stage::data_preprocessing] = pre ? pre->decision_id : "";
  if (features) {
    plan.spec.features = features->action;
    plan.spec.feature_params = numeric_params(*features, {"cv_folds", "smoothing", "k"});
  }
  plan.decision_ids[Stage::feature_engineering] = features ? features->decision_id : "";
  if (model) {
    plan.spec.model = model->action;
    plan.spec.model_params = numeric_params(*model, {"C", "alpha", "n_estimators", "learning_rate"});
  }
  plan.decision_ids[Stage::model_selection] = model ? model->decision_id : "";
  return plan;
}

std::vector<DecisionPoint> identify_points(const StagePlan& plan, std::span<const AuditFinding> findings,
                                           std::size_t cap) {
  if (plan.decision_ids.empty()) throw PlanError("stage plan has no bound stages");
  std::vector<DecisionPoint> points;
  for (Stage s : kPlanStages) {
    auto it = plan.decision_ids.find(s);
    if (it == plan.decision_ids.end()) continue;
    DecisionPoint p{s, it->second, 100.0};
    for (const auto& f : findings) {
      if (!p.decision_id.empty() && f.decision_id == p.decision_id) p.risk = f.scores.risk;
    }
    points.push_back(p);
  }
  if (points.empty()) throw PlanError("stage plan has no bound stages");
  std::stable_sort(points.begin(), points.end(),
                   [](const DecisionPoint& a, const DecisionPoint& b) { return a.risk < b.risk; });
  if (points.size() > cap) points.resize(cap);
  return points;
}

std::string AlternativeDecision::label() const {
  std::string out = action;
  if (!params.empty()) {
    out += "(";
    bool first = true;
    for (const auto& [k, v] : params) {
      out += (first ? "" : ",") + k + "=" + scalar_to_string(v);
      first = false;
    }
    out += ")";
  }
  return out;
}

AlternativeDecision control_alternative(const StagePlan& plan, const DecisionPoint& point) {
  AlternativeDecision alt{point, "", {}};
  switch (point.stage) {
    case Stage::data_preprocessing:
      alt.action = plan.spec.scaler + "+" + plan.spec.imputer;
      break;
    case Stage::feature_engineering:
      alt.action = plan.spec.features;
      alt.params = plan.spec.feature_params;
      break;
    default:
      alt.action = plan.spec.model;
      alt.params = plan.spec.model_params;
      break;
  }
  return alt;
}

std::vector<AlternativeDecision> enumerate_alternatives(const StagePlan& plan, const DecisionPoint& point,
                                                        const Dataset& d, std::size_t max_alternatives) {
  std::vector<AlternativeDecision> catalog;
  auto add = [&](std::string action, std::map<std::string, Scalar> params) {
    catalog.push_back({point, std::move(action), std::move(params)});
  };
  switch (point.stage) {
    case Stage::data_preprocessing:
      for (const char* imputer : {"impute_mean", "impute_median"}) {
        for (const char* scaler : {"standard_scale", "minmax_scale", "none"}) {
          add(std::string(scaler) + "+" + imputer, {});
        }
      }
      break;
    case Stage::feature_engineering:
      add("one_hot_encode", {});
      if (has_kind(d, true)) add("target_encode", {{"cv_folds", 5.0}, {"smoothing", 10.0}});
      add("select_top_k", {{"k", 10.0}});
      if (has_kind(d, false)) add("poly_features", {});
      break;
    case Stage::model_selection:
    case Stage::hyperparameter_opt:
      if (d.task == TaskKind::classification) {
        add("fit_logistic", {{"C", 1.0}});
        add("fit_gbt", {{"n_estimators", 200.0}, {"learning_rate", 0.1}});
        add("fit_logistic", {{"C", 0.1}});
        add("fit_gbt", {{"n_estimators", 50.0}, {"learning_rate", 0.3}});
      } else {
        add("fit_ridge", {{"alpha", 1.0}});
        add("fit_gbt", {{"n_estimators", 200.0}, {"learning_rate", 0.1}});
        add("fit_ridge", {{"alpha", 10.0}});
        add("fit_gbt", {{"n_estimators", 50.0}, {"learning_rate", 0.3}});
      }
      break;
  }
  const PipelineSpec original = plan.spec;
  std::vector<AlternativeDecision> out;
  for (auto& alt : catalog) {
    const PipelineSpec changed = apply_alternative(original, alt);
    const bool same = point.stage == Stage::feature_engineering ? changed.features == original.features
                                                                : changed == original;
    if (same) continue;
    out.push_back(std::move(alt));
    if (out.size() == max_alternatives) break;
  }
  if (out.empty()) throw EnumError("no compatible alternative for decision '" + point.decision_id + "'");
  return out;
}

PipelineSpec apply_alternative(const PipelineSpec& spec, const AlternativeDecision& alt) {
  PipelineSpec out = spec;
  switch (alt.point.stage) {
    case Stage::data_preprocessing: {
      const auto plus = alt.action.find('+');
      if (plus == std::string::npos) throw SpecError("preprocessing alternative must be '<scaler>+<imputer>'");
      out.scaler = alt.action.substr(0, plus);
      out.imputer = alt.action.substr(plus + 1);
      break;
    }
    case Stage::feature_engineering:
      out.features = alt.action;
      out.feature_params = alt.params;
      break;
    default:
      out.model = alt.action;
      out.model_params = alt.params;
      break;
  }
  check_spec(out);
  return out;
}

std::string_view to_string(CfMode m) {
  switch (m) {
    case CfMode::reexecution:
      return "reexecution";
    case CfMode::simulation:
      return "simulation";
    case CfMode::published:
      return "published";
  }
  return "unknown";
}

double impact(MetricKind metric, double original, double alternative) {
  if (lower_is_better(metric)) {
    if (original == 0.0) return 0.0;
    return -(alternative - original) / original * 100.0;
  }
  return (alternative - original) * 100.0;
}

CounterfactualResult reexecute(PipelineExecutor& executor, const StagePlan& plan, const AlternativeDecision& alt) {
  const Dataset& d = executor.dataset();
  CounterfactualResult r;
  r.dataset = d.name;
  r.point = alt.point;
  r.alternative = alt.label();
  r.mode = CfMode::reexecution;
  try {
    const PipelineSpec changed = apply_alternative(plan.spec, alt);
    const ExecutionResult base = executor.run(plan.spec);
    const ExecutionResult arm = executor.run(changed);
    r.metric_original = base.metric;
    r.metric_alternative = arm.metric;
    r.delta = impact(d.metric_primary, base.metric, arm.metric);
    r.explanation = std::string(to_string(d.metric_primary)) + " " + std::to_string(base.metric) + " -> " +
                    std::to_string(arm.metric) + " replacing " + control_alternative(plan, alt.point).label() +
                    " with " + r.alternative;
  } catch (const FitError& e) {
    r.feasible = false;
    r.explanation = std::string("infeasible: ") + e.what();
  }
  return r;
}

std::vector<CounterfactualResult> run_counterfactuals(const Dataset& d, const RunLog& log,
                                                      std::span<const AuditFinding> findings,
                                                      const CounterfactualOptions& options) {
  const StagePlan plan = plan_from_log(log);
  const auto points = identify_points(plan, findings, options.cap);
  std::vector<AlternativeDecision> jobs;
  for (const auto& p : points) {
    for (auto& a : enumerate_alternatives(plan, p, d, options.max_alternatives)) jobs.push_back(std::move(a));
  }
  PipelineExecutor executor(d, options.seed);
  std::vector<CounterfactualResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) results[i] = reexecute(executor, plan, jobs[i]);
  };
  const std::size_t n_threads = std::clamp<std::size_t>(options.threads, 1, std::max<std::size_t>(1, jobs.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return results;
}

std::map<Stage, StageImpactParams> default_impact_params() {
  return {{Stage::data_preprocessing, {0.7, 0.4}},
          {Stage::feature_engineering, {1.5, 0.5}},
          {Stage::model_selection, {2.7, 0.6}}};
}

std::vector<CounterfactualResult> simulate_impacts(const std::map<Stage, StageImpactParams>& params, std::size_t n,
                                                   std::uint64_t seed) {
  std::vector<CounterfactualResult> out;
  for (const auto& [stage, p] : params) {
    if (p.sigma < 0.0) throw ArgError("simulation sigma must be non-negative");
    std::mt19937_64 rng(derive_seed(seed, "simulate/" + stage_key(stage)));
    std::normal_distribution<double> z(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      CounterfactualResult r;
      r.dataset = "simulated";
      r.point = {stage, "sim" + std::to_string(i + 1), 100.0};
      r.alternative = "simulated";
      r.delta = p.mu + p.sigma * z(rng);
      r.metric_alternative = r.delta;
      r.mode = CfMode::simulation;
      r.explanation = "drawn from Normal(" + std::to_string(p.mu) + ", " + std::to_string(p.sigma) + ")";
      out.push_back(std::move(r));
    }
  }
  return out;
}

AttributionReport attribute(std::span<const CounterfactualResult> results) {
  AttributionReport rep;
  std::map<std::string, std::vector<double>> by_stage, by_dataset;
  std::vector<double> all;
  for (const auto& r : results) {
    if (!r.feasible) {
      ++rep.infeasible;
      continue;
    }
    by_stage[stage_key(r.point.stage)].push_back(r.delta);
    by_dataset[r.dataset].push_back(r.delta);
    all.push_back(r.delta);
  }
  if (all.empty()) throw ArgError("attribution needs at least one feasible result");
  for (const auto& [k, v] : by_stage) rep.per_stage[k] = stats_of(v);
  for (const auto& [k, v] : by_dataset) rep.per_dataset[k] = stats_of(v);
  rep.overall = stats_of(all);
  return rep;
}

std::vector<std::string> stage_ranking(const AttributionReport& report) {
  std::vector<std::pair<std::string, double>> v;
  for (const auto& [k, s] : report.per_stage) v.emplace_back(k, s.avg_abs_impact);
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (const auto& [k, s] : v) out.push_back(k);
  return out;
}

std::vector<CounterfactualResult> impacts_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw SchemaError("$", "impact fixture must be an array");
  std::vector<CounterfactualResult> out;
  std::size_t i = 0;
  for (const auto& e : j) {
    ++i;
    if (!e.is_object() || !e.contains("dataset") || !e.contains("stage") || !e.contains("impact") ||
        !e["impact"].is_number() || !e["dataset"].is_string() || !e["stage"].is_string()) {
      throw SchemaError("[" + std::to_string(i - 1) + "]", "impact entry needs dataset, stage and numeric impact");
    }
    CounterfactualResult r;
    r.dataset = e["dataset"].get<std::string>();
    r.point = {stage_from_key(e["stage"].get<std::string>()), "p" + std::to_string(i), 100.0};
    r.alternative = e.value("alternative", "published");
    r.delta = e["impact"].get<double>();
    r.mode = CfMode::published;
    out.push_back(std::move(r));
  }
  return out;
}

nlohmann::json to_json(const CounterfactualResult& r) {
  return {{"dataset", r.dataset},
          {"point", {{"stage", stage_key(r.point.stage)}, {"decision_id", r.point.decision_id}, {"risk", r.point.risk}}},
          {"alternative", r.alternative},
          {"metric_original", r.metric_original},
          {"metric_alternative", r.metric_alternative},
          {"delta", r.delta},
          {"mode", to_string(r.mode)},
          {"feasible", r.feasible},
          {"explanation", r.explanation}};
}

nlohmann::json to_json(const ImpactStats& s) {
  return {{"n", s.n}, {"avg_abs_impact", s.avg_abs_impact}, {"mean_impact", s.mean_impact}, {"min", s.min},
          {"max", s.max}};
}

nlohmann::json to_json(const AttributionReport& r) {
  nlohmann::json stages = nlohmann::json::object(), datasets = nlohmann::json::object();
  for (const auto& [k, s] : r.per_stage) stages[k] = to_json(s);
  for (const auto& [k, s] : r.per_dataset) datasets[k] = to_json(s);
  return {{"per_stage", stages}, {"per_dataset", datasets}, {"overall", to_json(r.overall)},
          {"infeasible", r.infeasible}};
}

}  // namespace ea
