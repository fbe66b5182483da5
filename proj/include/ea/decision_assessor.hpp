#pragma once

// Five-dimension rubric scoring of logged decisions, fault classification and
// detection reporting against labeled corpora.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ea/decision_log.hpp"
#include "ea/fault_catalog.hpp"

namespace ea {

struct RubricScores {
  double appropriateness = 80.0;
  double consistency = 80.0;
  double completeness = 80.0;
  double efficiency = 80.0;
  double risk = 85.0;  // lower = riskier
  std::vector<std::string> tags;
  std::string explanation;

  bool operator==(const RubricScores&) const = default;
};

/// Throws SchemaError if scores leave [0,100], the explanation is empty or a tag is unknown.
void check_rubric(const RubricScores& s);

/// Tag vocabulary accepted in RubricScores::tags.
std::span<const std::string_view> rubric_tags();

/// Base scores per signature; dimensions combine by minimum when several fire.
struct SignatureTable {
  double default_risk = 85.0;
  double default_other = 80.0;
  double leakage_risk = 25.0;
  double leakage_appropriateness = 45.0;
  double temporal_risk = 30.0;
  double target_risk = 20.0;
  double incompatible_appropriateness = 40.0;
  double incompatible_consistency = 45.0;
  double incompatible_risk = 50.0;
  double overfit_risk = 55.0;
  double overfit_ratio = 0.1;
  double subtle_risk = 62.0;
  double decoy_risk = 63.0;
  double decoy_efficiency = 60.0;
  std::int64_t deep_model_min_rows = 10000;
};

struct AssessorConfig {
  double risk_threshold = 60.0;
  /// Per-dimension Gaussian noise; 0 makes scoring deterministic.
  double noise_sigma = 7.5;
  std::uint64_t seed = 0;
  SignatureTable table;
};

/// Throws ConfigError when tau is outside (0,100) or sigma is negative.
void check_config(const AssessorConfig& cfg);

/// Scoring interface; a model-backed judge can replace the rule-based default.
class DecisionScorer {
 public:
  virtual ~DecisionScorer() = default;
  virtual RubricScores score(const DecisionRecord& record, std::span<const DecisionRecord> lineage,
                             const RunManifest& manifest) const = 0;
};

class RuleBasedScorer final : public DecisionScorer {
 public:
  explicit RuleBasedScorer(AssessorConfig cfg);
  RubricScores score(const DecisionRecord& record, std::span<const DecisionRecord> lineage,
                     const RunManifest& manifest) const override;
  const AssessorConfig& config() const noexcept { return cfg_; }

 private:
  AssessorConfig cfg_;
};

RubricScores assess_decision(const DecisionRecord& record, std::span<const DecisionRecord> lineage,
                             const RunManifest& manifest, const AssessorConfig& cfg);

/// Noise-free signature evaluation; assess_decision adds noise on top.
RubricScores signature_scores(const DecisionRecord& record, std::span<const DecisionRecord> lineage,
                              const RunManifest& manifest, const SignatureTable& table);

/// First matching class in priority order, leakage classes first.
std::optional<FaultClass> classify_fault(const RubricScores& scores, const DecisionRecord& record);

struct AuditFinding {
  std::string decision_id;
  bool flagged = false;
  std::optional<FaultClass> predicted_class;
  RubricScores scores;

  bool operator==(const AuditFinding&) const = default;
};

struct DetectionReport {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  /// True positives whose predicted class equals the injected class.
  std::size_t class_correct = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const DetectionReport&) const = default;
};

/// Precision/recall/F1 from counts; a ratio with a zero denominator is reported as 0.
DetectionReport detection_report(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn);
DetectionReport pool_reports(std::span<const DetectionReport> reports);

struct AuditResult {
  std::vector<AuditFinding> findings;
  DetectionReport report;
};

/// Scores every record of the corpus. Labels are consulted only after scoring.
AuditResult audit_corpus(const LabeledCorpus& corpus, const AssessorConfig& cfg);
AuditResult audit_corpus(const LabeledCorpus& corpus, const DecisionScorer& scorer, double risk_threshold);

/// Findings only, for unlabeled logs.
std::vector<AuditFinding> audit_log(const RunLog& log, const AssessorConfig& cfg);

nlohmann::json to_json(const RubricScores& s);
nlohmann::json to_json(const AuditFinding& f);
nlohmann::json to_json(const DetectionReport& r);

}  // namespace ea
