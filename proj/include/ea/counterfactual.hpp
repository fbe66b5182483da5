#pragma once

// What-if analysis: pick critical decision points, swap in plausible alternatives,
// re-run the stages downstream of the change and attribute the metric deltas.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ea/dataset.hpp"
#include "ea/decision_assessor.hpp"
#include "ea/decision_log.hpp"
#include "ea/pipeline.hpp"

namespace ea {

/// Pipeline bindings recovered from a decision log. An empty decision id marks a stage the log
/// never bound (the reference default is used).
struct StagePlan {
  PipelineSpec spec;
  std::map<Stage, std::string> decision_ids;  // data_preprocessing, feature_engineering, model_selection
};

/// Throws PlanError on a log without decisions.
StagePlan plan_from_log(const RunLog& log);

struct DecisionPoint {
  Stage stage = Stage::data_preprocessing;
  std::string decision_id;
  double risk = 100.0;

  bool operator==(const DecisionPoint&) const = default;
};

/// One point per plan stage, ascending audit risk, ties broken by stage order. Throws PlanError
/// on an empty plan.
std::vector<DecisionPoint> identify_points(const StagePlan& plan, std::span<const AuditFinding> findings,
                                           std::size_t cap = 3);

struct AlternativeDecision {
  DecisionPoint point;
  std::string action;  // for preprocessing: "<scaler>+<imputer>"
  std::map<std::string, Scalar> params;

  std::string label() const;
};

/// Up to `max_alternatives` catalog options for the point, excluding the current binding and
/// options the task or schema cannot support. Throws EnumError when none remain.
std::vector<AlternativeDecision> enumerate_alternatives(const StagePlan& plan, const DecisionPoint& point,
                                                        const Dataset& d, std::size_t max_alternatives = 3);

/// The plan's pipeline with one binding replaced.
PipelineSpec apply_alternative(const PipelineSpec& spec, const AlternativeDecision& alt);

/// The alternative that re-binds the current choice (control arm).
AlternativeDecision control_alternative(const StagePlan& plan, const DecisionPoint& point);

enum class CfMode { reexecution, simulation, published };
std::string_view to_string(CfMode m);

struct CounterfactualResult {
  std::string dataset;
  DecisionPoint point;
  std::string alternative;
  double metric_original = 0.0;
  double metric_alternative = 0.0;
  /// Uniform impact sign, positive = improvement: percentage points for classification,
  /// negated relative error change (x100) for lower-is-better regression metrics.
  double delta = 0.0;
  CfMode mode = CfMode::reexecution;
  bool feasible = true;
  std::string explanation;
};

/// Impact of moving from `original` to `alternative` under the dataset's primary metric.
double impact(MetricKind metric, double original, double alternative);

/// Re-runs the stages at and below the point, reusing cached upstream artifacts.
/// Fit failures yield a result tagged infeasible.
CounterfactualResult reexecute(PipelineExecutor& executor, const StagePlan& plan, const AlternativeDecision& alt);

struct CounterfactualOptions {
  std::size_t cap = 3;
  std::size_t max_alternatives = 3;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

/// identify_points -> enumerate_alternatives -> reexecute for one dataset and log.
/// Arms run in parallel when threads > 1; result order does not depend on scheduling.
std::vector<CounterfactualResult> run_counterfactuals(const Dataset& d, const RunLog& log,
                                                      std::span<const AuditFinding> findings,
                                                      const CounterfactualOptions& options);

struct StageImpactParams {
  double mu = 0.0;
  double sigma = 0.0;
};

/// Defaults calibrated to published stage means: preprocessing 0.7, features 1.5, model 2.7.
std::map<Stage, StageImpactParams> default_impact_params();

/// Draws n impacts per stage from Normal(mu, sigma).
std::vector<CounterfactualResult> simulate_impacts(const std::map<Stage, StageImpactParams>& params, std::size_t n,
                                                   std::uint64_t seed);

struct ImpactStats {
  std::size_t n = 0;
  double avg_abs_impact = 0.0;
  double mean_impact = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct AttributionReport {
  std::map<std::string, ImpactStats> per_stage;
  std::map<std::string, ImpactStats> per_dataset;
  ImpactStats overall;
  std::size_t infeasible = 0;
};

/// Aggregates feasible results. Throws ArgError when there are none.
AttributionReport attribute(std::span<const CounterfactualResult> results);

/// Stage names ordered by descending average absolute impact.
std::vector<std::string> stage_ranking(const AttributionReport& report);

/// Published per-decision impacts: [{"dataset", "stage", "impact"}, ...].
std::vector<CounterfactualResult> impacts_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CounterfactualResult& r);
nlohmann::json to_json(const ImpactStats& s);
nlohmann::json to_json(const AttributionReport& r);

}  // namespace ea
