#include "ea/fault_catalog.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <set>

#include "ea/seeding.hpp"

namespace ea {

namespace {

constexpr std::array<FaultClass, 7> kClasses{
    FaultClass::leak_normalize_before_split, FaultClass::leak_encoder_on_test,
    FaultClass::temporal_shuffle,            FaultClass::target_leakage,
    FaultClass::inappropriate_model,         FaultClass::overfit_no_regularization,
    FaultClass::subtle_encoding,
};

constexpr std::array<std::string_view, 7> kClassNames{
    "leak_normalize_before_split", "leak_encoder_on_test", "temporal_shuffle",         "target_leakage",
    "inappropriate_model",         "overfit_no_regularization", "subtle_encoding",
};

std::string pad_id(std::size_t i) {
  std::string s = std::to_string(i);
  return "d" + std::string(s.size() < 2 ? 2 - s.size() : 0, '0') + s;
}

DecisionRecord record(std::string id, Stage stage, std::string action, std::map<std::string, Scalar> params,
                      std::string rationale, std::vector<std::string> parents, std::int64_t ts) {
  DecisionRecord d;
  d.decision_id = std::move(id);
  d.stage = stage;
  d.action = std::move(action);
  d.params = std::move(params);
  d.rationale = std::move(rationale);
  d.parents = std::move(parents);
  d.timestamp = ts;
  return d;
}

const FeatureSpec* first_of_kind(const RunManifest& m, FeatureKind k) {
  for (const auto& f : m.features) {
    if (f.kind == k) return &f;
  }
  return nullptr;
}

}  // namespace

std::string_view to_string(FaultClass c) { return kClassNames[static_cast<std::size_t>(c)]; }

std::string_view to_string(SeverityPrior s) {
  switch (s) {
    case SeverityPrior::critical:
      return "critical";
    case SeverityPrior::major:
      return "major";
    case SeverityPrior::borderline:
      return "borderline";
  }
  return "?";
}

std::optional<FaultClass> parse_fault_class(std::string_view s) {
  for (std::size_t i = 0; i < kClassNames.size(); ++i) {
    if (kClassNames[i] == s) return kClasses[i];
  }
  return std::nullopt;
}

std::span<const FaultClass> all_fault_classes() { return kClasses; }

SeverityPrior severity_prior(FaultClass c) {
  switch (c) {
    case FaultClass::leak_normalize_before_split:
    case FaultClass::leak_encoder_on_test:
    case FaultClass::temporal_shuffle:
    case FaultClass::target_leakage:
      return SeverityPrior::critical;
    case FaultClass::inappropriate_model:
    case FaultClass::overfit_no_regularization:
      return SeverityPrior::major;
    case FaultClass::subtle_encoding:
      return SeverityPrior::borderline;
  }
  return SeverityPrior::major;
}

bool is_critical(FaultClass c) { return severity_prior(c) == SeverityPrior::critical; }

std::vector<DecisionRecord> clean_pipeline(const RunManifest& m, std::size_t n_records) {
  const bool regression = m.task == TaskKind::regression;
  const FeatureSpec* when = first_of_kind(m, FeatureKind::datetime);

  std::vector<DecisionRecord> out;
  out.reserve(n_records);
  auto ts = [&]() { return static_cast<std::int64_t>((out.size() + 1) * 10); };
  auto next_id = [&]() { return pad_id(out.size() + 1); };

  if (n_records == 0) return out;
  if (when) {
    out.push_back(record(next_id(), Stage::data_preprocessing, "time_split",
                         {{"test_size", 0.2}, {"order_by", when->name}},
                         "Hold out the most recent 20% of rows, ordered by " + when->name + ".", {}, ts()));
  } else {
    std::map<std::string, Scalar> p{{"test_size", 0.2}, {"shuffle", true}, {"seed", std::int64_t{42}}};
    if (!regression) p["stratify"] = true;
    out.push_back(record(next_id(), Stage::data_preprocessing, "train_test_split", std::move(p),
                         "Hold out 20% of rows as a test set before fitting anything.", {}, ts()));
  }
  if (out.size() < n_records) {
    out.push_back(record(next_id(), Stage::data_preprocessing, "impute_median", {{"fit_on", "train"}},
                         "Fill numeric gaps with the training median.", {"d01"}, ts()));
  }

  std::size_t k = 0;
  while (out.size() < n_records) {
    std::vector<std::string> parents{k % 2 == 0 ? "d02" : "d01"};
    if (out.size() < 2) parents = {"d01"};
    const std::string id = next_id();
    switch (k % 11) {
      case 0:
        out.push_back(record(id, Stage::data_preprocessing, "standard_scale", {{"fit_on", "train"}},
                             "Standardize numeric columns using training statistics.", parents, ts()));
        break;
      case 1:
        out.push_back(record(id, Stage::feature_engineering, "one_hot_encode",
                             {{"fit_on", "train"}, {"handle_unknown", "ignore"}},
                             "One-hot encode categorical columns fitted on the training split.", parents, ts()));
        break;
      case 2:
        out.push_back(record(id, Stage::feature_engineering, "target_encode",
                             {{"cv_folds", std::int64_t{5}}, {"smoothing", 10.0}},
                             "Target-encode high-cardinality columns with out-of-fold means.", parents, ts()));
        break;
      case 3:
        out.push_back(record(id, Stage::feature_engineering, "select_top_k", {{"k", std::int64_t{10}}},
                             "Keep the ten features most correlated with the target.", parents, ts()));
        break;
      case 4:
        out.push_back(record(id, Stage::feature_engineering, "poly_features", {{"degree", std::int64_t{2}}},
                             "Add pairwise interaction terms.", parents, ts()));
        break;
      case 5:
        if (regression) {
          out.push_back(record(id, Stage::model_selection, "fit_ridge", {{"alpha", 1.0}},
                               "Start from a ridge baseline.", parents, ts()));
        } else {
          out.push_back(record(id, Stage::model_selection, "fit_logistic", {{"C", 1.0}},
                               "Start from a logistic regression baseline.", parents, ts()));
        }
        break;
      case 6:
        out.push_back(record(id, Stage::model_selection, "fit_gbt",
                             {{"n_estimators", std::int64_t{200}}, {"max_depth", std::int64_t{3}},
                              {"learning_rate", 0.1}},
                             "Try gradient-boosted trees with shallow depth.", parents, ts()));
        break;
      case 7:
        out.push_back(record(id, Stage::hyperparameter_opt, "set_regularization",
                             {{"penalty", "l2"}, {"strength", 1.0}},
                             "Keep an L2 penalty to control variance.", parents, ts()));
        break;
      case 8:
        out.push_back(record(id, Stage::data_preprocessing, "minmax_scale", {{"fit_on", "train"}},
                             "Rescale bounded columns to [0, 1] with training ranges.", parents, ts()));
        break;
      case 9:
        out.push_back(record(id, Stage::data_preprocessing, "impute_mean", {{"fit_on", "train"}},
                             "Fill remaining gaps with training means.", parents, ts()));
        break;
      default:
        out.push_back(record(id, Stage::hyperparameter_opt, "fit_gbt",
                             {{"n_estimators", std::int64_t{300}}, {"max_depth", std::int64_t{4}},
                              {"learning_rate", 0.05}},
                             "Tune boosting with a smaller learning rate.", parents, ts()));
        break;
    }
    ++k;
  }
  return out;
}

DecisionRecord make_fault_record(FaultClass c, const DecisionRecord& slot, const RunManifest& m) {
  DecisionRecord d;
  d.decision_id = slot.decision_id;
  d.timestamp = slot.timestamp;
  d.parents = slot.parents;
  switch (c) {
    case FaultClass::leak_normalize_before_split:
      d.stage = Stage::data_preprocessing;
      d.action = "standard_scale";
      d.params = {{"fit_on", "all"}};
      d.parents.clear();
      d.rationale = "Standardize every column on the full table so the scales are consistent.";
      break;
    case FaultClass::leak_encoder_on_test:
      d.stage = Stage::feature_engineering;
      d.action = "one_hot_encode";
      d.params = {{"fit_on", "test"}, {"handle_unknown", "error"}};
      d.rationale = "Fit the encoder on the evaluation rows so no category is unseen.";
      break;
    case FaultClass::temporal_shuffle:
      d.stage = Stage::data_preprocessing;
      d.action = "shuffle_split";
      d.params = {{"test_size", 0.2}, {"shuffle", true}};
      d.parents.clear();
      d.rationale = "Randomly shuffle rows before holding out a test set.";
      break;
    case FaultClass::target_leakage:
      d.stage = Stage::feature_engineering;
      d.action = "poly_features";
      d.params = {{"degree", std::int64_t{2}}, {"include_target", true}};
      d.rationale = "Build interaction terms over all columns.";
      break;
    case FaultClass::inappropriate_model:
      d.stage = Stage::model_selection;
      d.action = "fit_deep_mlp";
      d.params = {{"hidden_layers", std::int64_t{6}}, {"units", std::int64_t{512}}, {"epochs", std::int64_t{300}}};
      d.rationale = "A deep network should capture every interaction.";
      break;
    case FaultClass::overfit_no_regularization:
      d.stage = Stage::hyperparameter_opt;
      d.action = "set_regularization";
      d.params = {{"penalty", "none"},
                  {"strength", 0.0},
                  {"n_features", std::max<std::int64_t>(1, m.n_train / 4)}};
      d.rationale = "Drop the penalty after expanding the feature set.";
      break;
    case FaultClass::subtle_encoding:
      d.stage = Stage::feature_engineering;
      d.action = "target_encode";
      d.params = {{"smoothing", 10.0}};
      d.rationale = "Target-encode the high-cardinality columns.";
      break;
  }
  return d;
}

DecisionRecord make_decoy_record(const DecisionRecord& slot, std::size_t variant) {
  DecisionRecord d;
  d.decision_id = slot.decision_id;
  d.timestamp = slot.timestamp;
  d.parents = slot.parents;
  switch (variant % 3) {
    case 0:
      d.stage = Stage::feature_engineering;
      d.action = "select_top_k";
      d.params = {{"k", std::int64_t{3}}};
      d.rationale = "Keep only the three strongest features.";
      break;
    case 1:
      d.stage = Stage::hyperparameter_opt;
      d.action = "fit_gbt";
      d.params = {{"n_estimators", std::int64_t{1500}}, {"max_depth", std::int64_t{10}}, {"learning_rate", 0.02}};
      d.rationale = "Push boosting capacity as far as the budget allows.";
      break;
    default:
      d.stage = Stage::feature_engineering;
      d.action = "poly_features";
      d.params = {{"degree", std::int64_t{3}}};
      d.rationale = "Add cubic interaction terms.";
      break;
  }
  return d;
}

LabeledCorpus inject(const RunManifest& manifest, std::span<const DecisionRecord> clean, const InjectionPlan& plan) {
  const std::size_t total = plan.n_clean + plan.n_faulty;
  if (clean.size() < total)
    throw PlanError("need " + std::to_string(total) + " clean decisions, got " + std::to_string(clean.size()));
  std::size_t mix_sum = 0;
  for (const auto& [cls, n] : plan.class_mix) {
    mix_sum += n;
    if (n > 0 && cls == FaultClass::temporal_shuffle && !manifest.has_feature_kind(FeatureKind::datetime))
      throw PlanError("temporal_shuffle requires a datetime feature in dataset '" + manifest.dataset_id + "'");
  }
  if (mix_sum != plan.n_faulty)
    throw PlanError("class_mix sums to " + std::to_string(mix_sum) + " but n_faulty is " +
                    std::to_string(plan.n_faulty));
  if (plan.n_decoys > plan.n_clean) throw PlanError("n_decoys exceeds n_clean");

  std::vector<DecisionRecord> records(clean.begin(), clean.begin() + static_cast<std::ptrdiff_t>(total));
  validate_decisions(records);

  std::set<std::string> has_children;
  for (const auto& r : records) {
    for (const auto& p : r.parents) has_children.insert(p);
  }
  std::vector<std::size_t> slots;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!is_split_action(records[i].action) && !has_children.count(records[i].decision_id)) slots.push_back(i);
  }
  if (slots.size() < plan.n_faulty + plan.n_decoys)
    throw PlanError("only " + std::to_string(slots.size()) + " leaf slots for " +
                    std::to_string(plan.n_faulty + plan.n_decoys) + " injections");

  std::mt19937_64 rng(derive_seed(plan.seed, plan.dataset_id));
  for (std::size_t i = slots.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(slots[i - 1], slots[pick(rng)]);
  }

  std::vector<FaultClass> queue;
  for (const auto& [cls, n] : plan.class_mix) queue.insert(queue.end(), n, cls);

  LabeledCorpus corpus;
  corpus.manifest = manifest;
  for (const auto& r : records) corpus.labels[r.decision_id] = Label{};
  for (std::size_t i = 0; i < queue.size(); ++i) {
    DecisionRecord& slot = records[slots[i]];
    slot = make_fault_record(queue[i], slot, manifest);
    corpus.labels[slot.decision_id] = Label{true, queue[i], false};
  }
  for (std::size_t j = 0; j < plan.n_decoys; ++j) {
    DecisionRecord& slot = records[slots[queue.size() + j]];
    slot = make_decoy_record(slot, j);
    corpus.labels[slot.decision_id] = Label{false, std::nullopt, true};
  }
  validate_decisions(records);
  corpus.records = std::move(records);
  return corpus;
}

CorpusStats corpus_stats(const LabeledCorpus& corpus) {
  CorpusStats s;
  s.total = corpus.labels.size();
  for (const auto& [id, label] : corpus.labels) {
    if (!label.is_faulty) continue;
    ++s.faulty;
    if (label.fault) ++s.per_class[*label.fault];
  }
  return s;
}

nlohmann::json labels_to_json(const LabeledCorpus& corpus) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [id, label] : corpus.labels) {
    out[id] = {{"is_faulty", label.is_faulty},
               {"class", label.fault ? nlohmann::json(to_string(*label.fault)) : nlohmann::json(nullptr)},
               {"decoy", label.decoy}};
  }
  return out;
}

std::map<std::string, Label> labels_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("labels", "expected an object keyed by decision_id");
  std::map<std::string, Label> out;
  for (const auto& [id, v] : j.items()) {
    const std::string path = "labels." + id;
    if (!v.is_object()) throw SchemaError(path, "expected an object");
    Label label;
    auto faulty = v.find("is_faulty");
    if (faulty == v.end() || !faulty->is_boolean()) throw SchemaError(path + ".is_faulty", "expected a bool");
    label.is_faulty = faulty->get<bool>();
    if (auto c = v.find("class"); c != v.end() && !c->is_null()) {
      if (!c->is_string()) throw SchemaError(path + ".class", "expected a string or null");
      auto cls = parse_fault_class(c->get<std::string>());
      if (!cls) throw SchemaError(path + ".class", "unknown fault class");
      label.fault = *cls;
    }
    if (auto d = v.find("decoy"); d != v.end()) {
      if (!d->is_boolean()) throw SchemaError(path + ".decoy", "expected a bool");
      label.decoy = d->get<bool>();
    }
    if (label.fault && !label.is_faulty) throw SchemaError(path, "clean label cannot carry a fault class");
    out.emplace(id, label);
  }
  return out;
}

std::map<FaultClass, std::size_t> replica_mix(std::string_view dataset_id) {
  using F = FaultClass;
  if (dataset_id == "german_credit")
    return {{F::subtle_encoding, 3}, {F::overfit_no_regularization, 5}, {F::inappropriate_model, 2},
            {F::leak_normalize_before_split, 2}, {F::leak_encoder_on_test, 2}, {F::target_leakage, 1}};
  if (dataset_id == "adult_income")
    return {{F::subtle_encoding, 2},   {F::overfit_no_regularization, 5},   {F::inappropriate_model, 2},
            {F::leak_normalize_before_split, 2}, {F::leak_encoder_on_test, 1}, {F::temporal_shuffle, 2},
            {F::target_leakage, 1}};
  if (dataset_id == "titanic")
    return {{F::subtle_encoding, 1}, {F::overfit_no_regularization, 5}, {F::inappropriate_model, 2},
            {F::leak_normalize_before_split, 3}, {F::leak_encoder_on_test, 2}, {F::target_leakage, 2}};
  if (dataset_id == "diabetes")
    return {{F::subtle_encoding, 1}, {F::overfit_no_regularization, 5}, {F::inappropriate_model, 2},
            {F::leak_normalize_before_split, 3}, {F::leak_encoder_on_test, 2}, {F::target_leakage, 2}};
  if (dataset_id == "ca_housing")
    return {{F::overfit_no_regularization, 5}, {F::inappropriate_model, 2}, {F::leak_normalize_before_split, 2},
            {F::leak_encoder_on_test, 2},      {F::temporal_shuffle, 2},    {F::target_leakage, 2}};
  throw NotFound("no replica fault mix for dataset '" + std::string(dataset_id) + "'");
}

}  // namespace ea
