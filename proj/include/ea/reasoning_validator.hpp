#pragma once

// Claim extraction and the four deterministic check families applied to agent
// reasoning snippets, plus the two comparison baselines and the snippet generator.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ea/decision_log.hpp"
#include "ea/stats.hpp"

namespace ea {

enum class SnippetLabel {
  valid,
  hallucinated_fact,
  logical_contradiction,
  numerical_hallucination,
  action_reasoning_mismatch,
};

enum class Severity { critical, major, minor };

std::string_view to_string(SnippetLabel l);
std::string_view to_string(Severity s);
std::optional<SnippetLabel> parse_snippet_label(std::string_view s);
std::span<const SnippetLabel> all_snippet_labels();

enum class ClaimKind { fact, numeric_derivation, predicate, action_ref };

std::string_view to_string(ClaimKind k);

struct Claim {
  ClaimKind kind = ClaimKind::fact;
  /// fact: rows | train_rows | test_rows | columns | <artifact name>;
  /// numeric_derivation: metric word; predicate: predicate name; action_ref: action.
  std::string subject;
  std::optional<double> value;
  std::optional<double> from_value;
  std::optional<double> to_value;
  std::optional<double> claimed_delta_pct;
  /// What the claimed percentage measures: "improvement", "increase" or "reduction".
  std::string delta_sense;
  /// Direction verb of a derivation: +1/-1 raw increase/decrease, +2/-2 got better/worse, 0 none.
  int direction = 0;
  bool polarity = true;
  /// Decimal places shown for the value being checked; -1 when unknown.
  int decimals = -1;

  bool operator==(const Claim&) const = default;
};

struct ReasoningSnippet {
  std::string snippet_id;
  std::string text;
  std::vector<Claim> claims;
  std::vector<std::string> linked_decisions;

  bool operator==(const ReasoningSnippet&) const = default;
};

struct Evidence {
  int claim_index = -1;  // -1 when the evidence is not tied to a claim
  std::string ref;       // artifact name or rule id

  bool operator==(const Evidence&) const = default;
};

struct ReasoningVerdict {
  bool valid = true;
  std::optional<SnippetLabel> category;
  std::vector<Evidence> evidence;
  Severity severity = Severity::minor;
  double confidence = 1.0;

  /// Collapsed label: valid or the failing category.
  SnippetLabel label() const { return category.value_or(SnippetLabel::valid); }
  bool operator==(const ReasoningVerdict&) const = default;
};

struct ValidatorConfig {
  double relative_tolerance = 1e-6;
  Severity factual_severity = Severity::major;
  Severity logical_severity = Severity::critical;
  Severity numerical_severity = Severity::major;
  Severity alignment_severity = Severity::major;
};

/// Grammar-based claim extraction; text without a recognised pattern yields no claims.
std::vector<Claim> extract_claims(std::string_view text);

/// Relative change in percent, signed so that positive means the metric got better.
double relative_improvement_pct(std::string_view metric, double from, double to);
bool metric_word_lower_is_better(std::string_view metric);

ReasoningVerdict validate(const ReasoningSnippet& snippet, const RunManifest& manifest,
                          std::span<const DecisionRecord> log, const ValidatorConfig& cfg = {});

/// Keyword-only detector without access to artifacts.
ReasoningVerdict baseline_rule(const ReasoningSnippet& snippet);

struct JudgeConfig {
  /// Probability of returning the true label, indexed by SnippetLabel.
  std::array<double, 5> accuracy{5.0 / 12.0, 3.0 / 12.0, 2.0 / 12.0, 5.0 / 12.0, 1.0 / 12.0};
};

/// Simulated unanchored judge: returns the true label with the configured per-category
/// probability, otherwise a uniformly drawn wrong label. Seeded per snippet.
ReasoningVerdict baseline_stochastic_judge(const ReasoningSnippet& snippet, SnippetLabel truth, std::uint64_t seed,
                                           const JudgeConfig& cfg = {});

struct LabeledSnippets {
  std::vector<ReasoningSnippet> snippets;
  std::map<std::string, SnippetLabel> labels;
  /// Ids of planted partially aligned mismatch snippets.
  std::set<std::string> borderline;
};

struct GeneratorConfig {
  std::size_t n_per_category = 12;
  double borderline_fraction = 0.25;
};

/// Grammar-conformant snippets with planted facts taken from the manifest and log.
LabeledSnippets generate_snippet_set(const RunManifest& manifest, std::span<const DecisionRecord> log,
                                     std::uint64_t seed, const GeneratorConfig& cfg = {});

struct CategoryTally {
  std::size_t total = 0;
  std::size_t correct = 0;
};

struct BaselineComparison {
  double accuracy = 0.0;
  std::map<SnippetLabel, CategoryTally> per_category;
  ZTest test;
};

struct ValidationReport {
  std::map<SnippetLabel, CategoryTally> per_category;
  std::size_t total = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::map<std::string, BaselineComparison> comparisons;
  /// Verdicts in snippet_id order.
  std::vector<std::pair<std::string, ReasoningVerdict>> verdicts;
};

struct SuiteOptions {
  std::set<std::string> baselines{"rule", "stochastic"};
  std::uint64_t judge_seed = 0;
  ValidatorConfig validator;
  JudgeConfig judge;
};

/// Throws ReportError on an empty set or a snippet without a truth label.
ValidationReport run_validation_suite(std::span<const ReasoningSnippet> snippets,
                                      const std::map<std::string, SnippetLabel>& labels,
                                      const RunManifest& manifest, std::span<const DecisionRecord> log,
                                      const SuiteOptions& options = {});

nlohmann::json to_json(const Claim& c);
Claim claim_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ReasoningSnippet& s);
nlohmann::json to_json(const ReasoningVerdict& v);
nlohmann::json to_json(const ValidationReport& r);

/// Snippet file: {"snippets": [...], "labels": {id: label}}. Labels come back separately.
LabeledSnippets load_snippet_file(std::string_view bytes);
std::string serialize_snippet_file(const LabeledSnippets& set);

}  // namespace ea
