#pragma once

// Decision-log data model: run manifest, decision records, JSON (de)serialization
// and the provenance graph linking each decision to its antecedents.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ea/errors.hpp"

namespace ea {

enum class TaskKind { classification, regression };
enum class FeatureKind { numeric, categorical, datetime };
enum class MetricKind { accuracy, f1, auc, rmse, mae, r2 };
enum class ArtifactSource { metric_log, config, code_trace };
enum class Stage { data_preprocessing, feature_engineering, model_selection, hyperparameter_opt };

std::string_view to_string(TaskKind v);
std::string_view to_string(FeatureKind v);
std::string_view to_string(MetricKind v);
std::string_view to_string(ArtifactSource v);
std::string_view to_string(Stage v);

std::optional<TaskKind> parse_task_kind(std::string_view s);
std::optional<FeatureKind> parse_feature_kind(std::string_view s);
std::optional<MetricKind> parse_metric_kind(std::string_view s);
std::optional<ArtifactSource> parse_artifact_source(std::string_view s);
std::optional<Stage> parse_stage(std::string_view s);

/// True for metrics where a smaller value is better (rmse, mae).
bool lower_is_better(MetricKind m);

/// Param and artifact values are scalars only.
using Scalar = std::variant<bool, std::int64_t, double, std::string>;

std::optional<double> as_number(const Scalar& v);
std::string scalar_to_string(const Scalar& v);
nlohmann::json scalar_to_json(const Scalar& v);

/// Controlled action vocabulary (v1).
std::span<const std::string_view> action_vocabulary();
bool is_known_action(std::string_view action);

bool is_split_action(std::string_view action);
bool is_scaler_action(std::string_view action);
bool is_imputer_action(std::string_view action);
bool is_encoder_action(std::string_view action);
bool is_fit_action(std::string_view action);

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
  bool protected_attr = false;

  bool operator==(const FeatureSpec&) const = default;
};

struct ArtifactFact {
  std::string name;
  Scalar value;
  ArtifactSource source = ArtifactSource::metric_log;

  bool operator==(const ArtifactFact&) const = default;
};

struct RunManifest {
  std::string run_id;
  std::string dataset_id;
  TaskKind task = TaskKind::classification;
  std::int64_t n_train = 0;
  std::int64_t n_test = 0;
  std::vector<FeatureSpec> features;
  MetricKind metric_primary = MetricKind::accuracy;
  std::map<std::string, ArtifactFact> artifacts;

  std::int64_t n_rows() const { return n_train + n_test; }
  bool has_feature_kind(FeatureKind kind) const;
  const FeatureSpec* feature(std::string_view name) const;
  const ArtifactFact* artifact(std::string_view name) const;

  bool operator==(const RunManifest&) const = default;
};

/// Throws SchemaError when the manifest invariants do not hold.
void validate_manifest(const RunManifest& m);

struct DecisionRecord {
  std::string decision_id;
  Stage stage = Stage::data_preprocessing;
  std::string action;
  std::map<std::string, Scalar> params;
  std::string rationale;
  std::vector<std::string> parents;
  std::int64_t timestamp = 0;

  const Scalar* param(std::string_view key) const;
  std::optional<double> number_param(std::string_view key) const;
  std::optional<std::string> string_param(std::string_view key) const;
  /// Boolean param; `fallback` when absent or not a bool.
  bool flag_param(std::string_view key, bool fallback = false) const;

  bool operator==(const DecisionRecord&) const = default;
};

struct RunLog {
  RunManifest manifest;
  std::vector<DecisionRecord> decisions;

  bool operator==(const RunLog&) const = default;
};

struct ParseOptions {
  /// Reject actions outside the vocabulary instead of accepting them as unverifiable.
  bool strict_actions = false;
};

/// Parses the native single-document log. Records come back ordered by timestamp.
/// Throws ParseError, SchemaError or GraphError; never anything else.
RunLog parse_run_log(std::string_view bytes, const ParseOptions& options = {});

/// Structured entry points for callers that already hold parsed JSON.
RunManifest manifest_from_json(const nlohmann::json& j);
DecisionRecord decision_from_json(const nlohmann::json& j, std::size_t index, const ParseOptions& options);

nlohmann::json to_json(const RunManifest& m);
nlohmann::json to_json(const DecisionRecord& d);
nlohmann::json to_json(const RunLog& log);
std::string serialize_run_log(const RunLog& log);

/// Checks id uniqueness, dangling parents, cycles and parent-before-child timestamps.
void validate_decisions(std::span<const DecisionRecord> records);

/// Maps a third-party journal format onto the native schema.
using LogAdapter = std::function<RunLog(std::string_view bytes)>;

/// Runs the adapter when given, otherwise the native parser; validation is always applied.
RunLog load_run_log(std::string_view bytes, const LogAdapter& adapter = {}, const ParseOptions& options = {});

class ProvenanceGraph {
 public:
  ProvenanceGraph() = default;

  /// Node order is topological with timestamp (then id) tie-breaks.
  const std::vector<std::string>& nodes() const noexcept { return order_; }
  const std::vector<std::pair<std::string, std::string>>& edges() const noexcept { return edges_; }

  bool contains(std::string_view id) const;
  std::span<const std::string> parents(std::string_view id) const;
  std::span<const std::string> children(std::string_view id) const;
  std::size_t position(std::string_view id) const;

 private:
  friend ProvenanceGraph build_provenance(std::span<const DecisionRecord> records);

  std::vector<std::string> order_;
  std::vector<std::pair<std::string, std::string>> edges_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::string>> parents_;
  std::vector<std::vector<std::string>> children_;
};

ProvenanceGraph build_provenance(std::span<const DecisionRecord> records);

/// All ancestors of `id` in topological order, ending with `id`. Throws NotFound.
std::vector<std::string> trace_lineage(const ProvenanceGraph& graph, std::string_view id);

/// Convenience: resolve a record's ancestors (excluding itself) to records.
std::vector<DecisionRecord> lineage_records(const ProvenanceGraph& graph,
                                            std::span<const DecisionRecord> records,
                                            std::string_view id);

}  // namespace ea
