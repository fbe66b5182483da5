#include "ea/decision_assessor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "ea/seeding.hpp"

namespace ea {

namespace {

constexpr std::array<std::string_view, 8> kTags{
    "data_leakage",          "temporal_leakage",       "target_leakage",     "incompatible_model",
    "high_feature_sample_ratio", "encoding_without_cv", "aggressive_choice", "unverifiable",
};

bool fit_on_leaks(const DecisionRecord& r) {
  auto fit_on = r.string_param("fit_on");
  return fit_on && (*fit_on == "all" || *fit_on == "full" || *fit_on == "test");
}

bool lineage_has_split(std::span<const DecisionRecord> lineage) {
  return std::any_of(lineage.begin(), lineage.end(), [](const DecisionRecord& r) { return is_split_action(r.action); });
}

struct Fired {
  RubricScores& s;
  std::vector<std::string> reasons;

  void tag(std::string_view t) {
    if (std::find(s.tags.begin(), s.tags.end(), t) == s.tags.end()) s.tags.emplace_back(t);
  }
  static void lower(double& dim, double value) { dim = std::min(dim, value); }
};

double clamp_score(double v) { return std::clamp(v, 0.0, 100.0); }

}  // namespace

std::span<const std::string_view> rubric_tags() { return kTags; }

void check_rubric(const RubricScores& s) {
  const std::array<std::pair<const char*, double>, 5> dims{{{"appropriateness", s.appropriateness},
                                                             {"consistency", s.consistency},
                                                             {"completeness", s.completeness},
                                                             {"efficiency", s.efficiency},
                                                             {"risk", s.risk}}};
  for (const auto& [name, v] : dims) {
    if (!(v >= 0.0 && v <= 100.0)) throw SchemaError(std::string("rubric.") + name, "score outside [0,100]");
  }
  if (s.explanation.empty()) throw SchemaError("rubric.explanation", "must be non-empty");
  for (const auto& t : s.tags) {
    if (std::find(kTags.begin(), kTags.end(), t) == kTags.end())
      throw SchemaError("rubric.tags", "unknown tag '" + t + "'");
  }
}

void check_config(const AssessorConfig& cfg) {
  if (!(cfg.risk_threshold > 0.0 && cfg.risk_threshold < 100.0))
    throw ConfigError("risk_threshold must lie in (0,100)");
  if (!(cfg.noise_sigma >= 0.0) || !std::isfinite(cfg.noise_sigma)) throw ConfigError("noise_sigma must be >= 0");
}

RubricScores signature_scores(const DecisionRecord& r, std::span<const DecisionRecord> lineage, const RunManifest& m,
                              const SignatureTable& t) {
  RubricScores s;
  s.appropriateness = s.consistency = s.completeness = s.efficiency = t.default_other;
  s.risk = t.default_risk;
  Fired f{s, {}};
  const std::string& a = r.action;

  if (!is_known_action(a)) {
    f.tag("unverifiable");
    f.reasons.push_back("action '" + a + "' is outside the controlled vocabulary; default scores kept");
  }

  if ((is_scaler_action(a) || is_imputer_action(a)) && (!lineage_has_split(lineage) || fit_on_leaks(r))) {
    f.tag("data_leakage");
    Fired::lower(s.risk, t.leakage_risk);
    Fired::lower(s.appropriateness, t.leakage_appropriateness);
    f.reasons.push_back(a + " is fitted on rows that include the test split");
  }
  if (is_encoder_action(a) && (fit_on_leaks(r) || !lineage_has_split(lineage))) {
    f.tag("data_leakage");
    Fired::lower(s.risk, t.leakage_risk);
    Fired::lower(s.appropriateness, t.leakage_appropriateness);
    f.reasons.push_back(a + " is fitted on held-out rows");
  }
  if (m.has_feature_kind(FeatureKind::datetime) &&
      (a == "shuffle_split" || (a == "train_test_split" && r.flag_param("shuffle", true)))) {
    f.tag("temporal_leakage");
    Fired::lower(s.risk, t.temporal_risk);
    f.reasons.push_back("random split on data with a time axis");
  }
  if (r.flag_param("include_target")) {
    f.tag("target_leakage");
    Fired::lower(s.risk, t.target_risk);
    f.reasons.push_back("the target column feeds feature construction");
  }
  const bool incompatible = (a == "fit_deep_mlp" && m.n_train < t.deep_model_min_rows) ||
                            (a == "fit_logistic" && m.task == TaskKind::regression) ||
                            (a == "fit_ridge" && m.task == TaskKind::classification);
  if (incompatible) {
    f.tag("incompatible_model");
    Fired::lower(s.appropriateness, t.incompatible_appropriateness);
    Fired::lower(s.consistency, t.incompatible_consistency);
    Fired::lower(s.risk, t.incompatible_risk);
    f.reasons.push_back(a + " does not suit a " + std::string(to_string(m.task)) + " task with " +
                        std::to_string(m.n_train) + " training rows");
  }
  {
    auto penalty = r.string_param("penalty");
    const bool switched_off = r.param("regularization") != nullptr && !r.flag_param("regularization", true);
    const bool unregularized = (penalty && *penalty == "none") || switched_off;
    if (unregularized) {
      const double n_features =
          r.number_param("n_features").value_or(static_cast<double>(m.features.size()));
      const double ratio = n_features / static_cast<double>(std::max<std::int64_t>(1, m.n_train));
      if (ratio >= t.overfit_ratio) {
        f.tag("high_feature_sample_ratio");
        Fired::lower(s.risk, t.overfit_risk);
        f.reasons.push_back("regularization disabled at feature/sample ratio " + std::to_string(ratio));
      }
    }
  }
  if (a == "target_encode" && r.number_param("cv_folds").value_or(0.0) < 2.0) {
    f.tag("encoding_without_cv");
    Fired::lower(s.risk, t.subtle_risk);
    f.reasons.push_back("target encoding without cross-fitted folds");
  }
  const bool aggressive = (a == "select_top_k" && r.number_param("k").value_or(1e9) <= 3.0) ||
                          (a == "fit_gbt" && (r.number_param("n_estimators").value_or(0.0) >= 1000.0 ||
                                              r.number_param("max_depth").value_or(0.0) >= 8.0)) ||
                          (a == "poly_features" && r.number_param("degree").value_or(0.0) >= 3.0);
  if (aggressive) {
    f.tag("aggressive_choice");
    Fired::lower(s.risk, t.decoy_risk);
    Fired::lower(s.efficiency, t.decoy_efficiency);
    f.reasons.push_back("aggressive but legal setting for " + a);
  }

  if (f.reasons.empty()) {
    s.explanation = a + ": no anti-pattern signature matched";
  } else {
    s.explanation = a + ": ";
    for (std::size_t i = 0; i < f.reasons.size(); ++i) s.explanation += (i ? "; " : "") + f.reasons[i];
  }
  return s;
}

RuleBasedScorer::RuleBasedScorer(AssessorConfig cfg) : cfg_(std::move(cfg)) { check_config(cfg_); }

RubricScores RuleBasedScorer::score(const DecisionRecord& record, std::span<const DecisionRecord> lineage,
                                    const RunManifest& manifest) const {
  RubricScores s = signature_scores(record, lineage, manifest, cfg_.table);
  if (cfg_.noise_sigma > 0.0) {
    std::mt19937_64 rng(derive_seed(cfg_.seed, manifest.run_id + "/" + record.decision_id));
    std::normal_distribution<double> noise(0.0, cfg_.noise_sigma);
    for (double* dim : {&s.appropriateness, &s.consistency, &s.completeness, &s.efficiency, &s.risk}) {
      *dim = clamp_score(*dim + noise(rng));
    }
  }
  return s;
}

RubricScores assess_decision(const DecisionRecord& record, std::span<const DecisionRecord> lineage,
                             const RunManifest& manifest, const AssessorConfig& cfg) {
  return RuleBasedScorer(cfg).score(record, lineage, manifest);
}

std::optional<FaultClass> classify_fault(const RubricScores& scores, const DecisionRecord& record) {
  auto has = [&](std::string_view t) { return std::find(scores.tags.begin(), scores.tags.end(), t) != scores.tags.end(); };
  if (has("data_leakage")) {
    if (is_encoder_action(record.action)) return FaultClass::leak_encoder_on_test;
    return FaultClass::leak_normalize_before_split;
  }
  if (has("temporal_leakage")) return FaultClass::temporal_shuffle;
  if (has("target_leakage")) return FaultClass::target_leakage;
  if (has("incompatible_model")) return FaultClass::inappropriate_model;
  if (has("high_feature_sample_ratio")) return FaultClass::overfit_no_regularization;
  if (has("encoding_without_cv")) return FaultClass::subtle_encoding;
  return std::nullopt;
}

DetectionReport detection_report(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
  DetectionReport r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.tn = tn;
  r.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  r.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  r.f1 = r.precision + r.recall > 0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

DetectionReport pool_reports(std::span<const DetectionReport> reports) {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0, correct = 0;
  for (const auto& r : reports) {
    tp += r.tp;
    fp += r.fp;
    fn += r.fn;
    tn += r.tn;
    correct += r.class_correct;
  }
  DetectionReport out = detection_report(tp, fp, fn, tn);
  out.class_correct = correct;
  return out;
}

namespace {

std::vector<AuditFinding> score_records(const RunManifest& manifest, std::span<const DecisionRecord> records,
                                        const DecisionScorer& scorer, double tau) {
  const ProvenanceGraph graph = build_provenance(records);
  std::vector<AuditFinding> findings;
  findings.reserve(records.size());
  for (const auto& r : records) {
    const auto lineage = lineage_records(graph, records, r.decision_id);
    AuditFinding f;
    f.decision_id = r.decision_id;
    f.scores = scorer.score(r, lineage, manifest);
    check_rubric(f.scores);
    f.flagged = f.scores.risk < tau;
    if (f.flagged) f.predicted_class = classify_fault(f.scores, r);
    findings.push_back(std::move(f));
  }
  return findings;
}

}  // namespace

AuditResult audit_corpus(const LabeledCorpus& corpus, const DecisionScorer& scorer, double tau) {
  AuditResult out;
  out.findings = score_records(corpus.manifest, corpus.records, scorer, tau);
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0, correct = 0;
  for (const auto& f : out.findings) {
    auto it = corpus.labels.find(f.decision_id);
    if (it == corpus.labels.end()) throw SchemaError("labels." + f.decision_id, "record has no label");
    const Label& label = it->second;
    if (f.flagged && label.is_faulty) {
      ++tp;
      if (f.predicted_class && label.fault && *f.predicted_class == *label.fault) ++correct;
    } else if (f.flagged) {
      ++fp;
    } else if (label.is_faulty) {
      ++fn;
    } else {
      ++tn;
    }
  }
  out.report = detection_report(tp, fp, fn, tn);
  out.report.class_correct = correct;
  return out;
}

AuditResult audit_corpus(const LabeledCorpus& corpus, const AssessorConfig& cfg) {
  RuleBasedScorer scorer(cfg);
  return audit_corpus(corpus, scorer, cfg.risk_threshold);
}

std::vector<AuditFinding> audit_log(const RunLog& log, const AssessorConfig& cfg) {
  RuleBasedScorer scorer(cfg);
  return score_records(log.manifest, log.decisions, scorer, cfg.risk_threshold);
}

nlohmann::json to_json(const RubricScores& s) {
  return {{"appropriateness", s.appropriateness},
          {"consistency", s.consistency},
          {"completeness", s.completeness},
          {"efficiency", s.efficiency},
          {"risk", s.risk},
          {"tags", s.tags},
          {"explanation", s.explanation}};
}

nlohmann::json to_json(const AuditFinding& f) {
  return {{"decision_id", f.decision_id},
          {"flagged", f.flagged},
          {"predicted_class", f.predicted_class ? nlohmann::json(to_string(*f.predicted_class)) : nlohmann::json()},
          {"scores", to_json(f.scores)}};
}

nlohmann::json to_json(const DetectionReport& r) {
  return {{"tp", r.tp},
          {"fp", r.fp},
          {"fn", r.fn},
          {"tn", r.tn},
          {"precision", r.precision},
          {"recall", r.recall},
          {"f1", r.f1},
          {"class_correct", r.class_correct}};
}

}  // namespace ea
