#include "ea/decision_log.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <tuple>
#include <unordered_set>

namespace ea {

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view s) {
  for (const auto& [value, name] : table) {
    if (name == s) return value;
  }
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E v) {
  for (const auto& [value, name] : table) {
    if (value == v) return name;
  }
  return "?";
}

constexpr std::array<std::pair<TaskKind, std::string_view>, 2> kTaskNames{{
    {TaskKind::classification, "classification"},
    {TaskKind::regression, "regression"},
}};

constexpr std::array<std::pair<FeatureKind, std::string_view>, 3> kFeatureNames{{
    {FeatureKind::numeric, "numeric"},
    {FeatureKind::categorical, "categorical"},
    {FeatureKind::datetime, "datetime"},
}};

constexpr std::array<std::pair<MetricKind, std::string_view>, 6> kMetricNames{{
    {MetricKind::accuracy, "accuracy"},
    {MetricKind::f1, "f1"},
    {MetricKind::auc, "auc"},
    {MetricKind::rmse, "rmse"},
    {MetricKind::mae, "mae"},
    {MetricKind::r2, "r2"},
}};

constexpr std::array<std::pair<ArtifactSource, std::string_view>, 3> kSourceNames{{
    {ArtifactSource::metric_log, "metric_log"},
    {ArtifactSource::config, "config"},
    {ArtifactSource::code_trace, "code_trace"},
}};

constexpr std::array<std::pair<Stage, std::string_view>, 4> kStageNames{{
    {Stage::data_preprocessing, "data_preprocessing"},
    {Stage::feature_engineering, "feature_engineering"},
    {Stage::model_selection, "model_selection"},
    {Stage::hyperparameter_opt, "hyperparameter_opt"},
}};

constexpr std::array<std::string_view, 16> kActions{
    "standard_scale", "minmax_scale",  "impute_mean",   "impute_median", "train_test_split", "shuffle_split",
    "time_split",     "one_hot_encode", "target_encode", "select_top_k",  "poly_features",    "fit_logistic",
    "fit_ridge",      "fit_gbt",        "fit_deep_mlp",  "set_regularization",
};

using json = nlohmann::json;

std::string field_path(std::string_view parent, std::string_view key) {
  std::string out(parent);
  if (!out.empty()) out += '.';
  out += key;
  return out;
}

const json& require(const json& obj, std::string_view key, std::string_view parent) {
  auto it = obj.find(std::string(key));
  if (it == obj.end()) throw SchemaError(field_path(parent, key), "missing required field");
  return *it;
}

std::string require_string(const json& obj, std::string_view key, std::string_view parent) {
  const json& v = require(obj, key, parent);
  if (!v.is_string()) throw SchemaError(field_path(parent, key), "expected a string");
  return v.get<std::string>();
}

std::int64_t require_integer(const json& obj, std::string_view key, std::string_view parent) {
  const json& v = require(obj, key, parent);
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_unsigned()) {
    auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
      throw SchemaError(field_path(parent, key), "integer out of range");
    return static_cast<std::int64_t>(u);
  }
  throw SchemaError(field_path(parent, key), "expected an integer");
}

Scalar scalar_from_json(const json& v, const std::string& field) {
  switch (v.type()) {
    case json::value_t::boolean:
      return v.get<bool>();
    case json::value_t::number_integer:
      return v.get<std::int64_t>();
    case json::value_t::number_unsigned: {
      auto u = v.get<std::uint64_t>();
      if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
        return static_cast<double>(u);
      return static_cast<std::int64_t>(u);
    }
    case json::value_t::number_float:
      return v.get<double>();
    case json::value_t::string:
      return v.get<std::string>();
    default:
      throw SchemaError(field, "expected a scalar (string, number or bool)");
  }
}

}  // namespace

std::string_view to_string(TaskKind v) { return name_of(kTaskNames, v); }
std::string_view to_string(FeatureKind v) { return name_of(kFeatureNames, v); }
std::string_view to_string(MetricKind v) { return name_of(kMetricNames, v); }
std::string_view to_string(ArtifactSource v) { return name_of(kSourceNames, v); }
std::string_view to_string(Stage v) { return name_of(kStageNames, v); }

std::optional<TaskKind> parse_task_kind(std::string_view s) { return lookup(kTaskNames, s); }
std::optional<FeatureKind> parse_feature_kind(std::string_view s) { return lookup(kFeatureNames, s); }
std::optional<MetricKind> parse_metric_kind(std::string_view s) { return lookup(kMetricNames, s); }
std::optional<ArtifactSource> parse_artifact_source(std::string_view s) { return lookup(kSourceNames, s); }
std::optional<Stage> parse_stage(std::string_view s) { return lookup(kStageNames, s); }

bool lower_is_better(MetricKind m) { return m == MetricKind::rmse || m == MetricKind::mae; }

std::optional<double> as_number(const Scalar& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  return std::nullopt;
}

std::string scalar_to_string(const Scalar& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::string>) {
          return x;
        } else {
          return json(x).dump();
        }
      },
      v);
}

json scalar_to_json(const Scalar& v) {
  return std::visit([](const auto& x) { return json(x); }, v);
}

std::span<const std::string_view> action_vocabulary() { return kActions; }

bool is_known_action(std::string_view action) {
  return std::find(kActions.begin(), kActions.end(), action) != kActions.end();
}

bool is_split_action(std::string_view a) {
  return a == "train_test_split" || a == "shuffle_split" || a == "time_split";
}
bool is_scaler_action(std::string_view a) { return a == "standard_scale" || a == "minmax_scale"; }
bool is_imputer_action(std::string_view a) { return a == "impute_mean" || a == "impute_median"; }
bool is_encoder_action(std::string_view a) { return a == "one_hot_encode" || a == "target_encode"; }
bool is_fit_action(std::string_view a) { return a.starts_with("fit_"); }

bool RunManifest::has_feature_kind(FeatureKind kind) const {
  return std::any_of(features.begin(), features.end(), [&](const FeatureSpec& f) { return f.kind == kind; });
}

const FeatureSpec* RunManifest::feature(std::string_view name) const {
  auto it = std::find_if(features.begin(), features.end(), [&](const FeatureSpec& f) { return f.name == name; });
  return it == features.end() ? nullptr : &*it;
}

const ArtifactFact* RunManifest::artifact(std::string_view name) const {
  auto it = artifacts.find(std::string(name));
  return it == artifacts.end() ? nullptr : &it->second;
}

void validate_manifest(const RunManifest& m) {
  if (m.n_train <= 0) throw SchemaError("manifest.n_train", "must be > 0");
  if (m.n_test <= 0) throw SchemaError("manifest.n_test", "must be > 0");
  std::set<std::string> names;
  for (const auto& f : m.features) {
    if (f.name.empty()) throw SchemaError("manifest.feature_schema", "feature name must be non-empty");
    if (!names.insert(f.name).second)
      throw SchemaError("manifest.feature_schema", "duplicate feature '" + f.name + "'");
    if (f.protected_attr && m.task != TaskKind::classification)
      throw SchemaError("manifest.feature_schema",
                        "protected feature '" + f.name + "' is only allowed on classification tasks");
  }
  const bool metric_fits_task = m.task == TaskKind::classification
                                    ? (m.metric_primary == MetricKind::accuracy || m.metric_primary == MetricKind::f1 ||
                                       m.metric_primary == MetricKind::auc)
                                    : (m.metric_primary == MetricKind::rmse || m.metric_primary == MetricKind::mae ||
                                       m.metric_primary == MetricKind::r2);
  if (!metric_fits_task) throw SchemaError("manifest.metric_primary", "metric does not match task_kind");
  for (const auto& [key, fact] : m.artifacts) {
    if (key != fact.name) throw SchemaError("manifest.artifacts", "artifact key/name mismatch for '" + key + "'");
  }
}

const Scalar* DecisionRecord::param(std::string_view key) const {
  auto it = params.find(std::string(key));
  return it == params.end() ? nullptr : &it->second;
}

std::optional<double> DecisionRecord::number_param(std::string_view key) const {
  const Scalar* v = param(key);
  return v ? as_number(*v) : std::nullopt;
}

std::optional<std::string> DecisionRecord::string_param(std::string_view key) const {
  const Scalar* v = param(key);
  if (!v) return std::nullopt;
  if (const auto* s = std::get_if<std::string>(v)) return *s;
  return std::nullopt;
}

bool DecisionRecord::flag_param(std::string_view key, bool fallback) const {
  const Scalar* v = param(key);
  if (!v) return fallback;
  if (const auto* b = std::get_if<bool>(v)) return *b;
  return fallback;
}

RunManifest manifest_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("manifest", "expected an object");
  RunManifest m;
  m.run_id = require_string(j, "run_id", "manifest");
  m.dataset_id = require_string(j, "dataset_id", "manifest");

  auto task = parse_task_kind(require_string(j, "task_kind", "manifest"));
  if (!task) throw SchemaError("manifest.task_kind", "unknown task kind");
  m.task = *task;

  m.n_train = require_integer(j, "n_train", "manifest");
  m.n_test = require_integer(j, "n_test", "manifest");

  const json& schema = require(j, "feature_schema", "manifest");
  if (!schema.is_array()) throw SchemaError("manifest.feature_schema", "expected an array");
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const json& f = schema[i];
    const std::string path = "manifest.feature_schema[" + std::to_string(i) + "]";
    if (!f.is_object()) throw SchemaError(path, "expected an object");
    FeatureSpec spec;
    spec.name = require_string(f, "name", path);
    auto kind = parse_feature_kind(require_string(f, "kind", path));
    if (!kind) throw SchemaError(path + ".kind", "unknown feature kind");
    spec.kind = *kind;
    if (auto it = f.find("protected"); it != f.end()) {
      if (!it->is_boolean()) throw SchemaError(path + ".protected", "expected a bool");
      spec.protected_attr = it->get<bool>();
    }
    m.features.push_back(std::move(spec));
  }

  auto metric = parse_metric_kind(require_string(j, "metric_primary", "manifest"));
  if (!metric) throw SchemaError("manifest.metric_primary", "unknown metric");
  m.metric_primary = *metric;

  if (auto it = j.find("artifacts"); it != j.end()) {
    if (!it->is_array()) throw SchemaError("manifest.artifacts", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& a = (*it)[i];
      const std::string path = "manifest.artifacts[" + std::to_string(i) + "]";
      if (!a.is_object()) throw SchemaError(path, "expected an object");
      ArtifactFact fact;
      fact.name = require_string(a, "name", path);
      fact.value = scalar_from_json(require(a, "value", path), path + ".value");
      auto source = parse_artifact_source(require_string(a, "source", path));
      if (!source) throw SchemaError(path + ".source", "unknown artifact source");
      fact.source = *source;
      if (m.artifacts.count(fact.name)) throw SchemaError(path + ".name", "duplicate artifact '" + fact.name + "'");
      m.artifacts.emplace(fact.name, std::move(fact));
    }
  }
  validate_manifest(m);
  return m;
}

DecisionRecord decision_from_json(const json& j, std::size_t index, const ParseOptions& options) {
  const std::string path = "decisions[" + std::to_string(index) + "]";
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  DecisionRecord d;
  d.decision_id = require_string(j, "decision_id", path);
  if (d.decision_id.empty()) throw SchemaError(path + ".decision_id", "must be non-empty");

  auto stage = parse_stage(require_string(j, "stage", path));
  if (!stage) throw SchemaError(path + ".stage", "unknown stage");
  d.stage = *stage;

  d.action = require_string(j, "action", path);
  if (d.action.empty()) throw SchemaError(path + ".action", "must be non-empty");
  if (options.strict_actions && !is_known_action(d.action))
    throw SchemaError(path + ".action", "unknown action '" + d.action + "'");

  if (auto it = j.find("params"); it != j.end()) {
    if (!it->is_object()) throw SchemaError(path + ".params", "expected an object");
    for (const auto& [key, value] : it->items()) {
      d.params.emplace(key, scalar_from_json(value, path + ".params." + key));
    }
  }
  if (auto it = j.find("rationale_text"); it != j.end()) {
    if (!it->is_string()) throw SchemaError(path + ".rationale_text", "expected a string");
    d.rationale = it->get<std::string>();
  }
  if (auto it = j.find("parents"); it != j.end()) {
    if (!it->is_array()) throw SchemaError(path + ".parents", "expected an array");
    for (const json& p : *it) {
      if (!p.is_string()) throw SchemaError(path + ".parents", "expected decision id strings");
      d.parents.push_back(p.get<std::string>());
    }
  }
  d.timestamp = require_integer(j, "timestamp", path);
  if (d.timestamp < 0) throw SchemaError(path + ".timestamp", "must be >= 0");
  return d;
}

void validate_decisions(std::span<const DecisionRecord> records) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!index.emplace(records[i].decision_id, i).second)
      throw GraphError("duplicate decision_id '" + records[i].decision_id + "'");
  }
  for (const auto& r : records) {
    for (const auto& p : r.parents) {
      if (!index.count(p)) throw GraphError("decision '" + r.decision_id + "' references unknown parent '" + p + "'");
    }
  }

  // Iterative DFS cycle search over parent links; reports the first cycle found.
  enum class Mark : unsigned char { fresh, active, done };
  std::vector<Mark> mark(records.size(), Mark::fresh);
  std::vector<std::size_t> path;
  for (std::size_t root = 0; root < records.size(); ++root) {
    if (mark[root] != Mark::fresh) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    mark[root] = Mark::active;
    path.assign(1, root);
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      const auto& parents = records[node].parents;
      if (next < parents.size()) {
        std::size_t p = index.at(parents[next++]);
        if (mark[p] == Mark::active) {
          auto start = std::find(path.begin(), path.end(), p);
          std::vector<std::string> cycle;
          for (auto it = start; it != path.end(); ++it) cycle.push_back(records[*it].decision_id);
          cycle.push_back(records[p].decision_id);
          std::string listing;
          for (std::size_t i = 0; i < cycle.size(); ++i) listing += (i ? " -> " : "") + cycle[i];
          throw GraphError("cycle in parents: " + listing, std::move(cycle));
        }
        if (mark[p] == Mark::fresh) {
          mark[p] = Mark::active;
          path.push_back(p);
          stack.emplace_back(p, 0);
        }
      } else {
        mark[node] = Mark::done;
        path.pop_back();
        stack.pop_back();
      }
    }
  }

  for (const auto& r : records) {
    for (const auto& p : r.parents) {
      if (records[index.at(p)].timestamp >= r.timestamp)
        throw GraphError("parent '" + p + "' of '" + r.decision_id + "' is not earlier in the log");
    }
  }
}

namespace {

RunLog log_from_json(const json& doc, const ParseOptions& options) {
  if (!doc.is_object()) throw SchemaError("$", "top-level value must be an object");
  RunLog log;
  log.manifest = manifest_from_json(require(doc, "manifest", ""));
  const json& decisions = require(doc, "decisions", "");
  if (!decisions.is_array()) throw SchemaError("decisions", "expected an array");
  log.decisions.reserve(decisions.size());
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    log.decisions.push_back(decision_from_json(decisions[i], i, options));
  }
  validate_decisions(log.decisions);
  std::stable_sort(log.decisions.begin(), log.decisions.end(),
                   [](const DecisionRecord& a, const DecisionRecord& b) { return a.timestamp < b.timestamp; });
  return log;
}

}  // namespace

RunLog parse_run_log(std::string_view bytes, const ParseOptions& options) {
  json doc;
  try {
    doc = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw ParseError(e.byte, e.what());
  }
  try {
    return log_from_json(doc, options);
  } catch (const Error&) {
    throw;
  } catch (const json::exception& e) {
    // Defensive net: any accessor mismatch still surfaces as a typed schema error.
    throw SchemaError("$", e.what());
  }
}

RunLog load_run_log(std::string_view bytes, const LogAdapter& adapter, const ParseOptions& options) {
  if (!adapter) return parse_run_log(bytes, options);
  RunLog log = adapter(bytes);
  validate_manifest(log.manifest);
  if (options.strict_actions) {
    for (const auto& d : log.decisions) {
      if (!is_known_action(d.action)) throw SchemaError("decisions.action", "unknown action '" + d.action + "'");
    }
  }
  validate_decisions(log.decisions);
  std::stable_sort(log.decisions.begin(), log.decisions.end(),
                   [](const DecisionRecord& a, const DecisionRecord& b) { return a.timestamp < b.timestamp; });
  return log;
}

json to_json(const RunManifest& m) {
  json features = json::array();
  for (const auto& f : m.features) {
    features.push_back({{"name", f.name}, {"kind", to_string(f.kind)}, {"protected", f.protected_attr}});
  }
  json artifacts = json::array();
  for (const auto& [name, fact] : m.artifacts) {
    artifacts.push_back({{"name", name}, {"value", scalar_to_json(fact.value)}, {"source", to_string(fact.source)}});
  }
  return {{"run_id", m.run_id},
          {"dataset_id", m.dataset_id},
          {"task_kind", to_string(m.task)},
          {"n_train", m.n_train},
          {"n_test", m.n_test},
          {"feature_schema", std::move(features)},
          {"metric_primary", to_string(m.metric_primary)},
          {"artifacts", std::move(artifacts)}};
}

json to_json(const DecisionRecord& d) {
  json params = json::object();
  for (const auto& [k, v] : d.params) params[k] = scalar_to_json(v);
  return {{"decision_id", d.decision_id}, {"stage", to_string(d.stage)}, {"action", d.action},
          {"params", std::move(params)},  {"rationale_text", d.rationale}, {"parents", d.parents},
          {"timestamp", d.timestamp}};
}

json to_json(const RunLog& log) {
  json decisions = json::array();
  for (const auto& d : log.decisions) decisions.push_back(to_json(d));
  return {{"manifest", to_json(log.manifest)}, {"decisions", std::move(decisions)}};
}

std::string serialize_run_log(const RunLog& log) { return to_json(log).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Provenance graph

ProvenanceGraph build_provenance(std::span<const DecisionRecord> records) {
  validate_decisions(records);

  ProvenanceGraph g;
  const std::size_t n = records.size();
  std::unordered_map<std::string, std::size_t> input_index;
  for (std::size_t i = 0; i < n; ++i) input_index.emplace(records[i].decision_id, i);

  // Kahn's algorithm; ready nodes are released in (timestamp, id) order.
  std::vector<std::size_t> indegree(n, 0);
  std::vector<std::vector<std::size_t>> kids(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& p : records[i].parents) {
      kids[input_index.at(p)].push_back(i);
      ++indegree[i];
    }
  }
  auto later = [&](std::size_t a, std::size_t b) {
    return std::tie(records[a].timestamp, records[a].decision_id) >
           std::tie(records[b].timestamp, records[b].decision_id);
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(later)> ready(later);
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push(i);
  }
  std::vector<std::size_t> topo;
  topo.reserve(n);
  while (!ready.empty()) {
    std::size_t i = ready.top();
    ready.pop();
    topo.push_back(i);
    for (std::size_t k : kids[i]) {
      if (--indegree[k] == 0) ready.push(k);
    }
  }

  g.order_.reserve(n);
  g.parents_.resize(n);
  g.children_.resize(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    g.order_.push_back(records[topo[pos]].decision_id);
    g.index_.emplace(g.order_.back(), pos);
  }
  for (std::size_t pos = 0; pos < n; ++pos) {
    const auto& rec = records[topo[pos]];
    for (const auto& p : rec.parents) {
      g.parents_[pos].push_back(p);
      g.children_[g.index_.at(p)].push_back(rec.decision_id);
      g.edges_.emplace_back(p, rec.decision_id);
    }
  }
  return g;
}

bool ProvenanceGraph::contains(std::string_view id) const { return index_.count(std::string(id)) > 0; }

std::size_t ProvenanceGraph::position(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) throw NotFound("unknown decision_id '" + std::string(id) + "'");
  return it->second;
}

std::span<const std::string> ProvenanceGraph::parents(std::string_view id) const { return parents_[position(id)]; }

std::span<const std::string> ProvenanceGraph::children(std::string_view id) const { return children_[position(id)]; }

std::vector<std::string> trace_lineage(const ProvenanceGraph& graph, std::string_view id) {
  const std::size_t target = graph.position(id);
  std::vector<char> seen(graph.nodes().size(), 0);
  std::vector<std::size_t> stack{target};
  seen[target] = 1;
  while (!stack.empty()) {
    std::size_t pos = stack.back();
    stack.pop_back();
    for (const auto& p : graph.parents(graph.nodes()[pos])) {
      std::size_t pp = graph.position(p);
      if (!seen[pp]) {
        seen[pp] = 1;
        stack.push_back(pp);
      }
    }
  }
  std::vector<std::string> out;
  for (std::size_t pos = 0; pos < seen.size(); ++pos) {
    if (seen[pos]) out.push_back(graph.nodes()[pos]);
  }
  return out;
}

std::vector<DecisionRecord> lineage_records(const ProvenanceGraph& graph, std::span<const DecisionRecord> records,
                                            std::string_view id) {
  std::unordered_map<std::string_view, const DecisionRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.decision_id, &r);
  std::vector<DecisionRecord> out;
  for (const auto& anc : trace_lineage(graph, id)) {
    if (anc == id) continue;
    out.push_back(*by_id.at(anc));
  }
  return out;
}

}  // namespace ea
