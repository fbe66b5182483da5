#include "ea/reasoning_validator.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include <fmt/format.h>

#include "ea/seeding.hpp"

namespace ea {

namespace {

constexpr std::array<SnippetLabel, 5> kLabels{
    SnippetLabel::valid, SnippetLabel::hallucinated_fact, SnippetLabel::logical_contradiction,
    SnippetLabel::numerical_hallucination, SnippetLabel::action_reasoning_mismatch};
constexpr std::array<std::string_view, 5> kLabelNames{"valid", "hallucinated_fact", "logical_contradiction",
                                                      "numerical_hallucination", "action_reasoning_mismatch"};

double tolerance(double truth, int decimals, double rel) {
  double tol = rel * std::fabs(truth);
  if (decimals >= 0) tol = std::max(tol, 0.5 * std::pow(10.0, -decimals));
  return tol + 1e-12;
}

std::optional<double> fact_truth(const Claim& c, const RunManifest& m, std::string& ref) {
  if (c.subject == "rows") {
    ref = "manifest.n_rows";
    return static_cast<double>(m.n_rows());
  }
  if (c.subject == "train_rows") {
    ref = "manifest.n_train";
    return static_cast<double>(m.n_train);
  }
  if (c.subject == "test_rows") {
    ref = "manifest.n_test";
    return static_cast<double>(m.n_test);
  }
  if (c.subject == "columns") {
    ref = "manifest.feature_schema";
    return static_cast<double>(m.features.size());
  }
  if (const ArtifactFact* a = m.artifact(c.subject)) {
    ref = "artifact:" + a->name;
    return as_number(a->value);
  }
  return std::nullopt;
}

double claimed_truth(const Claim& c) {
  const double from = *c.from_value;
  const double to = *c.to_value;
  const double raw = (to - from) / std::fabs(from) * 100.0;
  if (c.delta_sense == "increase") return raw;
  if (c.delta_sense == "reduction") return -raw;
  return relative_improvement_pct(c.subject, from, to);
}

}  // namespace

std::string_view to_string(SnippetLabel l) { return kLabelNames[static_cast<std::size_t>(l)]; }

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::critical:
      return "critical";
    case Severity::major:
      return "major";
    case Severity::minor:
      return "minor";
  }
  return "?";
}

std::optional<SnippetLabel> parse_snippet_label(std::string_view s) {
  for (std::size_t i = 0; i < kLabelNames.size(); ++i) {
    if (kLabelNames[i] == s) return kLabels[i];
  }
  return std::nullopt;
}

std::span<const SnippetLabel> all_snippet_labels() { return kLabels; }

std::string_view to_string(ClaimKind k) {
  switch (k) {
    case ClaimKind::fact:
      return "fact";
    case ClaimKind::numeric_derivation:
      return "numeric_derivation";
    case ClaimKind::predicate:
      return "predicate";
    case ClaimKind::action_ref:
      return "action_ref";
  }
  return "?";
}

ReasoningVerdict validate(const ReasoningSnippet& snippet, const RunManifest& manifest,
                          std::span<const DecisionRecord> log, const ValidatorConfig& cfg) {
  const std::vector<Claim> claims = snippet.claims.empty() ? extract_claims(snippet.text) : snippet.claims;
  const std::size_t n = claims.size();
  std::vector<char> verifiable(n, 0), failed(n, 0);
  std::array<std::vector<Evidence>, 4> found;  // factual, logical, numerical, alignment

  // factual
  for (std::size_t i = 0; i < n; ++i) {
    const Claim& c = claims[i];
    if (c.kind != ClaimKind::fact || !c.value) continue;
    std::string ref;
    auto truth = fact_truth(c, manifest, ref);
    if (!truth) continue;
    verifiable[i] = 1;
    if (std::fabs(*c.value - *truth) > tolerance(*truth, c.decimals, cfg.relative_tolerance)) {
      failed[i] = 1;
      found[0].push_back({static_cast<int>(i), ref});
    }
  }

  // logical
  std::map<std::string, std::size_t> first_seen;
  for (std::size_t i = 0; i < n; ++i) {
    const Claim& c = claims[i];
    if (c.kind == ClaimKind::predicate) {
      verifiable[i] = 1;
      auto [it, inserted] = first_seen.emplace(c.subject, i);
      if (!inserted && claims[it->second].polarity != c.polarity) {
        failed[i] = failed[it->second] = 1;
        found[1].push_back({static_cast<int>(i), "contradiction:" + c.subject});
      }
    } else if (c.kind == ClaimKind::numeric_derivation && c.direction != 0 && c.from_value && c.to_value &&
               *c.from_value != 0.0) {
      verifiable[i] = 1;
      const double moved = std::abs(c.direction) == 1 ? *c.to_value - *c.from_value
                                                      : relative_improvement_pct(c.subject, *c.from_value, *c.to_value);
      const int sign = c.direction > 0 ? 1 : -1;
      if (moved * sign < 0.0) {
        failed[i] = 1;
        found[1].push_back({static_cast<int>(i), "direction:" + c.subject});
      }
    }
  }

  // numerical
  for (std::size_t i = 0; i < n; ++i) {
    const Claim& c = claims[i];
    if (c.kind != ClaimKind::numeric_derivation || !c.claimed_delta_pct || !c.from_value || !c.to_value ||
        *c.from_value == 0.0)
      continue;
    verifiable[i] = 1;
    const double truth = claimed_truth(c);
    if (std::fabs(*c.claimed_delta_pct - truth) > tolerance(truth, c.decimals, cfg.relative_tolerance)) {
      failed[i] = 1;
      found[2].push_back({static_cast<int>(i), "arithmetic:" + c.subject});
    }
  }

  // alignment
  std::unordered_set<std::string_view> ids;
  for (const auto& r : log) ids.insert(r.decision_id);
  std::vector<const DecisionRecord*> scope;
  for (const auto& id : snippet.linked_decisions) {
    if (!ids.count(id)) {
      found[3].push_back({-1, "dangling_reference"});
      continue;
    }
    for (const auto& r : log) {
      if (r.decision_id == id) scope.push_back(&r);
    }
  }
  if (snippet.linked_decisions.empty()) {
    for (const auto& r : log) scope.push_back(&r);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Claim& c = claims[i];
    if (c.kind != ClaimKind::action_ref) continue;
    verifiable[i] = 1;
    const bool present =
        std::any_of(scope.begin(), scope.end(), [&](const DecisionRecord* r) { return r->action == c.subject; });
    if (!present) {
      failed[i] = 1;
      found[3].push_back({static_cast<int>(i), "action:" + c.subject});
    }
  }

  ReasoningVerdict v;
  const std::array<SnippetLabel, 4> family{SnippetLabel::hallucinated_fact, SnippetLabel::logical_contradiction,
                                           SnippetLabel::numerical_hallucination,
                                           SnippetLabel::action_reasoning_mismatch};
  const std::array<Severity, 4> severity{cfg.factual_severity, cfg.logical_severity, cfg.numerical_severity,
                                         cfg.alignment_severity};
  for (std::size_t f = 0; f < 4; ++f) {
    if (!found[f].empty() && !v.category) {
      v.valid = false;
      v.category = family[f];
      v.severity = severity[f];
    }
    v.evidence.insert(v.evidence.end(), found[f].begin(), found[f].end());
  }
  const auto n_verifiable = std::count(verifiable.begin(), verifiable.end(), 1);
  std::size_t n_verified = 0;
  for (std::size_t i = 0; i < n; ++i) n_verified += verifiable[i] && !failed[i];
  if (n_verifiable > 0) {
    v.confidence = static_cast<double>(n_verified) / static_cast<double>(n_verifiable);
  } else {
    v.confidence = v.valid ? 1.0 : 0.0;
  }
  return v;
}

ReasoningVerdict baseline_rule(const ReasoningSnippet& snippet) {
  std::string text(snippet.text);
  std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) { return std::tolower(c); });
  ReasoningVerdict v;
  auto flag = [&](SnippetLabel label, std::string ref) {
    v.valid = false;
    v.category = label;
    v.severity = Severity::major;
    v.confidence = 0.5;
    v.evidence.push_back({-1, std::move(ref)});
  };
  for (std::string_view kw : {"contradict", "inconsistent", "however"}) {
    if (text.find(kw) != std::string::npos) {
      flag(SnippetLabel::logical_contradiction, "keyword:" + std::string(kw));
      return v;
    }
  }
  for (std::size_t pos = text.find('%'); pos != std::string::npos; pos = text.find('%', pos + 1)) {
    std::size_t start = pos;
    while (start > 0 && (std::isdigit(static_cast<unsigned char>(text[start - 1])) || text[start - 1] == '.')) --start;
    double value = 0.0;
    if (start < pos && std::from_chars(text.data() + start, text.data() + pos, value).ec == std::errc() &&
        value >= 20.0) {
      flag(SnippetLabel::numerical_hallucination, "keyword:large_percentage");
      return v;
    }
  }
  for (std::string_view kw : {"leak", "peek"}) {
    if (text.find(kw) != std::string::npos) {
      flag(SnippetLabel::action_reasoning_mismatch, "keyword:" + std::string(kw));
      return v;
    }
  }
  return v;
}

ReasoningVerdict baseline_stochastic_judge(const ReasoningSnippet& snippet, SnippetLabel truth, std::uint64_t seed,
                                           const JudgeConfig& cfg) {
  std::mt19937_64 rng(derive_seed(seed, snippet.snippet_id));
  std::bernoulli_distribution right(std::clamp(cfg.accuracy[static_cast<std::size_t>(truth)], 0.0, 1.0));
  SnippetLabel label = truth;
  if (!right(rng)) {
    std::vector<SnippetLabel> others;
    for (auto l : kLabels) {
      if (l != truth) others.push_back(l);
    }
    std::uniform_int_distribution<std::size_t> pick(0, others.size() - 1);
    label = others[pick(rng)];
  }
  ReasoningVerdict v;
  if (label != SnippetLabel::valid) {
    v.valid = false;
    v.category = label;
    v.severity = Severity::major;
  }
  v.confidence = 0.5;
  return v;
}

// ---------------------------------------------------------------------------
// Suite

ValidationReport run_validation_suite(std::span<const ReasoningSnippet> snippets,
                                      const std::map<std::string, SnippetLabel>& labels, const RunManifest& manifest,
                                      std::span<const DecisionRecord> log, const SuiteOptions& options) {
  if (snippets.empty()) throw ReportError("validation suite needs at least one snippet");
  for (const auto& b : options.baselines) {
    if (b != "rule" && b != "stochastic") throw ArgError("unknown baseline '" + b + "'");
  }
  std::vector<const ReasoningSnippet*> ordered;
  for (const auto& s : snippets) ordered.push_back(&s);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const ReasoningSnippet* a, const ReasoningSnippet* b) { return a->snippet_id < b->snippet_id; });

  ValidationReport report;
  std::map<std::string, std::size_t> baseline_correct;
  for (const auto* s : ordered) {
    auto it = labels.find(s->snippet_id);
    if (it == labels.end()) throw ReportError("snippet '" + s->snippet_id + "' has no truth label");
    const SnippetLabel truth = it->second;
    ReasoningVerdict v = validate(*s, manifest, log, options.validator);
    auto& tally = report.per_category[truth];
    ++tally.total;
    if (v.label() == truth) {
      ++tally.correct;
      ++report.correct;
    }
    ++report.total;
    for (const auto& b : options.baselines) {
      ReasoningVerdict bv = b == "rule" ? baseline_rule(*s)
                                        : baseline_stochastic_judge(*s, truth, options.judge_seed, options.judge);
      auto& bt = report.comparisons[b].per_category[truth];
      ++bt.total;
      if (bv.label() == truth) {
        ++bt.correct;
        ++baseline_correct[b];
      }
    }
    report.verdicts.emplace_back(s->snippet_id, std::move(v));
  }
  const double n = static_cast<double>(report.total);
  report.accuracy = static_cast<double>(report.correct) / n;
  const Interval ci = wilson_interval(report.correct, report.total);
  report.ci_low = ci.low;
  report.ci_high = ci.high;
  for (auto& [name, cmp] : report.comparisons) {
    cmp.accuracy = static_cast<double>(baseline_correct[name]) / n;
    cmp.test = two_proportion_z(report.accuracy, report.total, cmp.accuracy, report.total);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Generator

namespace {

struct Gen {
  const RunManifest& m;
  std::span<const DecisionRecord> log;
  std::mt19937_64 rng;
  std::string metric;

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

  static double round_to(double v, int decimals) {
    const double f = std::pow(10.0, decimals);
    return std::round(v * f) / f;
  }

  // Metric values moving in the improving direction; the true relative change stays below 20%.
  std::pair<double, double> improving_pair() {
    if (metric_word_lower_is_better(metric)) {
      const double from = round_to(uniform(0.50, 1.00), 2);
      const double to = round_to(from - uniform(0.01, 0.06), 2);
      return {from, to};
    }
    const double from = round_to(uniform(0.60, 0.85), 2);
    const double to = round_to(from + uniform(0.01, 0.06), 2);
    return {from, to};
  }

  const DecisionRecord& pick_record() {
    std::vector<const DecisionRecord*> known;
    for (const auto& r : log) {
      if (is_known_action(r.action)) known.push_back(&r);
    }
    if (known.empty()) throw PlanError("snippet generation needs a log with known actions");
    return *known[index(known.size())];
  }

  const DecisionRecord* find_action(bool (*pred)(std::string_view)) {
    for (const auto& r : log) {
      if (pred(r.action)) return &r;
    }
    return nullptr;
  }

  const ArtifactFact* numeric_artifact() {
    std::vector<const ArtifactFact*> out;
    for (const auto& [name, a] : m.artifacts) {
      if (as_number(a.value) && name.find('_') != std::string::npos) out.push_back(&a);
    }
    return out.empty() ? nullptr : out[index(out.size())];
  }

  std::string absent_action(const DecisionRecord& r) {
    std::vector<std::string_view> options;
    for (auto a : action_vocabulary()) {
      if (a != r.action) options.push_back(a);
    }
    return std::string(options[index(options.size())]);
  }

  static std::string number_text(double v, int decimals) { return fmt::format("{:.{}f}", v, decimals); }

  std::string derivation_text(double from, double to, double pct) {
    return fmt::format("Validation {} improved from {:.2f} to {:.2f}, a {:.2f}% relative improvement.", metric,
                       from, to, pct);
  }

  ReasoningSnippet valid(std::size_t i) {
    ReasoningSnippet s;
    switch (i % 6) {
      case 0:
        s.text = fmt::format("The dataset has {} rows, and the training split has {} training rows.", m.n_rows(),
                             m.n_train);
        break;
      case 1: {
        auto [from, to] = improving_pair();
        s.text = derivation_text(from, to, relative_improvement_pct(metric, from, to));
        break;
      }
      case 2: {
        const DecisionRecord& r = pick_record();
        s.linked_decisions = {r.decision_id};
        s.text = fmt::format("We applied {} at this step, as planned for the {} stage.", r.action,
                             to_string(r.stage));
        break;
      }
      case 3:
        s.text = "We split the data first and kept regularization on to limit variance.";
        break;
      case 4: {
        if (const ArtifactFact* a = numeric_artifact()) {
          const double v = *as_number(a->value);
          s.text = fmt::format("The logged {} was {} at the end of the run.", a->name, number_text(v, 4));
        } else {
          s.text = fmt::format("The table has {} test rows.", m.n_test);
        }
        break;
      }
      default: {
        const DecisionRecord* r = find_action(is_scaler_action);
        if (i == 5 && r) {
          s.linked_decisions = {r->decision_id};
          s.text = fmt::format("We split the data before the scaler to avoid leakage, then applied {}.", r->action);
        } else {
          s.text = "The chosen pipeline looks reasonable for a tabular task of this size.";
        }
        break;
      }
    }
    return s;
  }

  ReasoningSnippet hallucinated_fact(std::size_t i) {
    ReasoningSnippet s;
    auto off = [&](double base) {
      const double delta = std::max(7.0, std::round(base * uniform(0.1, 0.3)));
      return static_cast<std::int64_t>(base + (index(2) == 0 ? delta : -std::min(delta, base - 1.0)));
    };
    switch (i % 5) {
      case 0:
        s.text = fmt::format("The dataset has {} rows in total.", off(static_cast<double>(m.n_rows())));
        break;
      case 1:
        s.text = fmt::format("The training split has {} training rows.", off(static_cast<double>(m.n_train)));
        break;
      case 2:
        s.text = fmt::format("The table has {} columns after loading.",
                             m.features.size() + 3 + index(6));
        break;
      case 3: {
        if (const ArtifactFact* a = numeric_artifact()) {
          const double v = *as_number(a->value);
          const double wrong = v + (std::fabs(v) > 1.0 ? std::fabs(v) * uniform(0.1, 0.3) : uniform(0.05, 0.15));
          s.text = fmt::format("The logged {} was {} at the end of the run.", a->name, number_text(wrong, 4));
        } else {
          s.text = fmt::format("The dataset has {} rows in total.", off(static_cast<double>(m.n_rows())));
        }
        break;
      }
      default:
        s.text = fmt::format("The evaluation split has {} test rows.", off(static_cast<double>(m.n_test)));
        break;
    }
    return s;
  }

  ReasoningSnippet logical(std::size_t i) {
    ReasoningSnippet s;
    switch (i % 6) {
      case 0:
        s.text = "There are no missing values, so we imputed missing values with the median.";
        break;
      case 1:
        s.text = "We scaled the features before fitting. For the final model we left the features unscaled.";
        break;
      case 2:
        s.text = "We split the data before training. The final model trained on all rows to use every label.";
        break;
      case 3:
        s.text = "We kept regularization on. Later we disabled regularization to fit the signal.";
        break;
      case 4: {
        auto [from, to] = improving_pair();
        s.text = fmt::format("Validation {} improved from {:.2f} to {:.2f} after tuning.", metric, to, from);
        break;
      }
      default:
        if (i == 5) {
          s.text = "We kept regularization for stability; however, the final model was fit without regularization.";
        } else {
          s.text = "The data has missing values in two columns. The report says there are no missing values.";
        }
        break;
    }
    return s;
  }

  ReasoningSnippet numerical(std::size_t i) {
    ReasoningSnippet s;
    auto [from, to] = improving_pair();
    const double truth = relative_improvement_pct(metric, from, to);
    double claimed = 0.0;
    if (i % 12 < 5) {
      claimed = 20.0 + uniform(1.0, 15.0);
    } else if (i % 2 == 0 && std::fabs(std::fabs(to - from) * 100.0 - truth) > 0.5) {
      claimed = std::fabs(to - from) * 100.0;  // absolute gap passed off as relative
    } else {
      claimed = truth + 3.0 + uniform(0.0, 3.0);
      if (claimed >= 20.0) claimed = std::max(0.5, truth - 3.0);
    }
    s.text = derivation_text(from, to, claimed);
    return s;
  }

  ReasoningSnippet mismatch(std::size_t i, bool borderline) {
    ReasoningSnippet s;
    const DecisionRecord& r = pick_record();
    if (borderline) {
      s.linked_decisions = {r.decision_id};
      s.text = "This step follows the usual recipe for tabular data and leans towards boosting-style learners.";
    } else if (i % 4 == 3) {
      s.linked_decisions = {"d99"};
      s.text = fmt::format("We applied {} here to keep the pipeline simple.", r.action);
    } else {
      s.linked_decisions = {r.decision_id};
      s.text = fmt::format("We applied {} here to keep the pipeline simple.", absent_action(r));
    }
    return s;
  }
};

}  // namespace

LabeledSnippets generate_snippet_set(const RunManifest& manifest, std::span<const DecisionRecord> log,
                                     std::uint64_t seed, const GeneratorConfig& cfg) {
  Gen g{manifest, log, std::mt19937_64(derive_seed(seed, "snippets/" + manifest.run_id)),
        std::string(to_string(manifest.metric_primary))};
  const std::size_t n = cfg.n_per_category;
  const auto n_border = static_cast<std::size_t>(std::llround(static_cast<double>(n) * cfg.borderline_fraction));

  struct Planted {
    ReasoningSnippet snippet;
    SnippetLabel label;
    bool borderline;
  };
  std::vector<Planted> planted;
  for (SnippetLabel label : kLabels) {
    for (std::size_t i = 0; i < n; ++i) {
      const bool border = label == SnippetLabel::action_reasoning_mismatch && i >= n - n_border;
      ReasoningSnippet s;
      switch (label) {
        case SnippetLabel::valid:
          s = g.valid(i);
          break;
        case SnippetLabel::hallucinated_fact:
          s = g.hallucinated_fact(i);
          break;
        case SnippetLabel::logical_contradiction:
          s = g.logical(i);
          break;
        case SnippetLabel::numerical_hallucination:
          s = g.numerical(i);
          break;
        case SnippetLabel::action_reasoning_mismatch:
          s = g.mismatch(i, border);
          break;
      }
      const SnippetLabel expected = border ? SnippetLabel::valid : label;
      const ReasoningVerdict v = validate(s, manifest, log);
      if (v.label() != expected)
        throw std::logic_error("generated snippet '" + s.text + "' validated as " + std::string(to_string(v.label())) +
                               ", expected " + std::string(to_string(expected)));
      planted.push_back({std::move(s), label, border});
    }
  }

  for (std::size_t i = planted.size(); i > 1; --i) std::swap(planted[i - 1], planted[g.index(i)]);

  LabeledSnippets out;
  const int width = planted.size() >= 100 ? 3 : 2;
  for (std::size_t i = 0; i < planted.size(); ++i) {
    auto& p = planted[i];
    p.snippet.snippet_id = fmt::format("s{:0{}}", i + 1, width);
    out.labels[p.snippet.snippet_id] = p.label;
    if (p.borderline) out.borderline.insert(p.snippet.snippet_id);
    out.snippets.push_back(std::move(p.snippet));
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const Claim& c) {
  nlohmann::json j{{"kind", to_string(c.kind)}, {"subject", c.subject}};
  if (c.value) j["value"] = *c.value;
  if (c.from_value) j["from_value"] = *c.from_value;
  if (c.to_value) j["to_value"] = *c.to_value;
  if (c.claimed_delta_pct) j["claimed_delta_pct"] = *c.claimed_delta_pct;
  if (!c.delta_sense.empty()) j["delta_sense"] = c.delta_sense;
  if (c.direction != 0) j["direction"] = c.direction;
  if (c.kind == ClaimKind::predicate) j["polarity"] = c.polarity;
  if (c.decimals >= 0) j["decimals"] = c.decimals;
  return j;
}

Claim claim_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("claims", "expected an object");
  Claim c;
  const std::string kind = j.value("kind", "");
  if (kind == "fact") {
    c.kind = ClaimKind::fact;
  } else if (kind == "numeric_derivation") {
    c.kind = ClaimKind::numeric_derivation;
  } else if (kind == "predicate") {
    c.kind = ClaimKind::predicate;
  } else if (kind == "action_ref") {
    c.kind = ClaimKind::action_ref;
  } else {
    throw SchemaError("claims.kind", "unknown claim kind '" + kind + "'");
  }
  if (!j.contains("subject") || !j["subject"].is_string()) throw SchemaError("claims.subject", "expected a string");
  c.subject = j["subject"].get<std::string>();
  auto number = [&](const char* key) -> std::optional<double> {
    auto it = j.find(key);
    if (it == j.end()) return std::nullopt;
    if (!it->is_number()) throw SchemaError(std::string("claims.") + key, "expected a number");
    const double v = it->get<double>();
    if (!std::isfinite(v)) throw SchemaError(std::string("claims.") + key, "must be finite");
    return v;
  };
  c.value = number("value");
  c.from_value = number("from_value");
  c.to_value = number("to_value");
  c.claimed_delta_pct = number("claimed_delta_pct");
  c.delta_sense = j.value("delta_sense", c.claimed_delta_pct ? "improvement" : "");
  c.direction = j.value("direction", 0);
  c.polarity = j.value("polarity", true);
  c.decimals = j.value("decimals", -1);
  return c;
}

nlohmann::json to_json(const ReasoningSnippet& s) {
  nlohmann::json j{{"snippet_id", s.snippet_id}, {"text", s.text}, {"linked_decisions", s.linked_decisions}};
  if (!s.claims.empty()) {
    nlohmann::json claims = nlohmann::json::array();
    for (const auto& c : s.claims) claims.push_back(to_json(c));
    j["claims"] = std::move(claims);
  }
  return j;
}

nlohmann::json to_json(const ReasoningVerdict& v) {
  nlohmann::json evidence = nlohmann::json::array();
  for (const auto& e : v.evidence) evidence.push_back({{"claim_index", e.claim_index}, {"ref", e.ref}});
  return {{"valid", v.valid},
          {"category", v.category ? nlohmann::json(to_string(*v.category)) : nlohmann::json()},
          {"evidence", std::move(evidence)},
          {"severity", to_string(v.severity)},
          {"confidence", v.confidence}};
}

nlohmann::json to_json(const ValidationReport& r) {
  auto tallies = [](const std::map<SnippetLabel, CategoryTally>& m) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [label, t] : m) out[std::string(to_string(label))] = {{"total", t.total}, {"correct", t.correct}};
    return out;
  };
  nlohmann::json comparisons = nlohmann::json::object();
  for (const auto& [name, c] : r.comparisons) {
    comparisons[name] = {{"accuracy", c.accuracy},
                         {"per_category", tallies(c.per_category)},
                         {"z", c.test.z},
                         {"p", c.test.p},
                         {"p_display", format_p(c.test.p)}};
  }
  nlohmann::json verdicts = nlohmann::json::array();
  for (const auto& [id, v] : r.verdicts) {
    nlohmann::json e = to_json(v);
    e["snippet_id"] = id;
    verdicts.push_back(std::move(e));
  }
  return {{"per_category", tallies(r.per_category)},
          {"total", r.total},
          {"correct", r.correct},
          {"accuracy", r.accuracy},
          {"ci_low", r.ci_low},
          {"ci_high", r.ci_high},
          {"comparisons", std::move(comparisons)},
          {"verdicts", std::move(verdicts)}};
}

LabeledSnippets load_snippet_file(std::string_view bytes) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.byte, e.what());
  }
  try {
    const nlohmann::json* list = &doc;
    if (doc.is_object()) {
      if (!doc.contains("snippets")) throw SchemaError("snippets", "missing required field");
      list = &doc["snippets"];
    }
    if (!list->is_array()) throw SchemaError("snippets", "expected an array");
    LabeledSnippets out;
    for (std::size_t i = 0; i < list->size(); ++i) {
      const auto& j = (*list)[i];
      const std::string path = "snippets[" + std::to_string(i) + "]";
      if (!j.is_object()) throw SchemaError(path, "expected an object");
      ReasoningSnippet s;
      if (!j.contains("snippet_id") || !j["snippet_id"].is_string())
        throw SchemaError(path + ".snippet_id", "expected a string");
      s.snippet_id = j["snippet_id"].get<std::string>();
      if (!j.contains("text") || !j["text"].is_string()) throw SchemaError(path + ".text", "expected a string");
      s.text = j["text"].get<std::string>();
      if (s.text.empty()) throw SchemaError(path + ".text", "must be non-empty");
      if (auto it = j.find("linked_decisions"); it != j.end()) {
        if (!it->is_array()) throw SchemaError(path + ".linked_decisions", "expected an array");
        for (const auto& id : *it) {
          if (!id.is_string()) throw SchemaError(path + ".linked_decisions", "expected strings");
          s.linked_decisions.push_back(id.get<std::string>());
        }
      }
      if (auto it = j.find("claims"); it != j.end()) {
        if (!it->is_array()) throw SchemaError(path + ".claims", "expected an array");
        for (const auto& c : *it) s.claims.push_back(claim_from_json(c));
      }
      out.snippets.push_back(std::move(s));
    }
    if (doc.is_object() && doc.contains("labels")) {
      const auto& labels = doc["labels"];
      if (!labels.is_object()) throw SchemaError("labels", "expected an object");
      for (const auto& [id, v] : labels.items()) {
        if (!v.is_string()) throw SchemaError("labels." + id, "expected a string");
        auto label = parse_snippet_label(v.get<std::string>());
        if (!label) throw SchemaError("labels." + id, "unknown label");
        out.labels[id] = *label;
      }
    }
    if (doc.is_object() && doc.contains("borderline")) {
      for (const auto& id : doc["borderline"]) out.borderline.insert(id.get<std::string>());
    }
    return out;
  } catch (const Error&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("$", e.what());
  }
}

std::string serialize_snippet_file(const LabeledSnippets& set) {
  nlohmann::json snippets = nlohmann::json::array();
  for (const auto& s : set.snippets) snippets.push_back(to_json(s));
  nlohmann::json labels = nlohmann::json::object();
  for (const auto& [id, l] : set.labels) labels[id] = to_string(l);
  return nlohmann::json{{"snippets", std::move(snippets)}, {"labels", std::move(labels)}, {"borderline", set.borderline}}
             .dump(2) +
         "\n";
}

}  // namespace ea
