#include "ea/report.hpp"

#include <fmt/format.h>

#include "ea/errors.hpp"

namespace ea {

namespace {

using nlohmann::json;

std::string cell(const json& v) {
  if (v.is_null()) return "-";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "yes" : "no";
  return v.dump();
}

std::string field(const json& row, const char* key) { return row.contains(key) ? cell(row[key]) : "-"; }

std::string table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::string out = "|";
  for (const auto& h : header) out += " " + h + " |";
  out += "\n|";
  for (std::size_t i = 0; i < header.size(); ++i) out += i == 0 ? "---|" : "---:|";
  out += "\n";
  for (const auto& r : rows) {
    out += "|";
    for (const auto& c : r) out += " " + c + " |";
    out += "\n";
  }
  return out;
}

std::string bands(const json& doc) {
  if (!doc.contains("bands") || doc["bands"].empty()) return "";
  std::vector<std::vector<std::string>> rows;
  for (const auto& b : doc["bands"]) {
    rows.push_back({cell(b["name"]), cell(b["value"]), cell(b["low"]), cell(b["high"]), b["pass"] ? "pass" : "FAIL"});
  }
  return "\n### Acceptance bands\n\n" + table({"Band", "Value", "Low", "High", "Result"}, rows);
}

std::string exp1_md(const json& doc) {
  std::string out = "## Decision assessment\n\n";
  std::vector<std::vector<std::string>> rows;
  auto add = [&](const std::string& name, const json& r) {
    rows.push_back({name, field(r, "n"), field(r, "faulty"), field(r, "precision"), field(r, "recall"), field(r, "f1")});
  };
  for (const auto& r : doc["datasets"]) add(cell(r["dataset"]), r);
  add("**Overall**", doc["overall"]);
  out += table({"Dataset", "N", "Faulty", "Precision", "Recall", "F1"}, rows);
  out += fmt::format("\nRisk threshold tau = {}, scoring noise sigma_d = {}, seed {}.\n", cell(doc["tau"]),
                     cell(doc["sigma_d"]), cell(doc["seed"]));
  if (doc.contains("multi_seed")) {
    const auto& m = doc["multi_seed"];
    const auto& f = m["f1"];
    out += fmt::format(
        "\nAcross {} seeds: mean F1 {} (std {}), 2.5-97.5th percentile [{}, {}]; share of seeds with F1 >= {}: {}.\n",
        cell(m["n_seeds"]), cell(f["mean"]), cell(f["std"]), cell(f["pct_2_5"]), cell(f["pct_97_5"]),
        cell(m["reference_f1"]), cell(m["fraction_at_least_reference"]));
  }
  return out + bands(doc);
}

std::string exp2_md(const json& doc) {
  std::string out = "## Reasoning validation\n\n";
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : doc["table"]) {
    rows.push_back({cell(r["category"]), field(r, "n"), field(r, "ea"), field(r, "rule"), field(r, "stochastic")});
  }
  const auto& c = doc["correct"];
  rows.push_back({"**Total correct**", cell(doc["n_snippets"]), field(c, "ea"), field(c, "rule"), field(c, "stochastic")});
  const auto& a = doc["accuracy"];
  rows.push_back({"**Accuracy**", "-", field(a, "ea"), field(a, "rule"), field(a, "stochastic")});
  const auto& s = doc["significance"];
  auto p = [&](const char* k) { return s.contains(k) ? "p " + cell(s[k]["p_display"]) : std::string("-"); };
  rows.push_back({"**z-test vs EA**", "-", "-", p("rule"), p("stochastic")});
  out += table({"Category", "N", "EA", "Rule", "LLM"}, rows);
  out += fmt::format("\nEA accuracy Wilson interval: [{}, {}].\n", cell(doc["wilson_95"][0]), cell(doc["wilson_95"][1]));
  return out + bands(doc);
}

std::string exp3_md(const json& doc) {
  std::string out = "## Model quality\n\n";
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : doc["table"]) {
    std::string dp = "-", eo = "-";
    for (const auto& [k, v] : r.items()) {
      if (k.rfind("dp_", 0) == 0) dp = cell(v) + " (" + k.substr(3) + ")";
      if (k.rfind("eo_", 0) == 0) eo = cell(v) + " (" + k.substr(3) + ")";
    }
    rows.push_back({cell(r["dataset"]), cell(r["model"]), cell(r["metric"]), cell(r["value"]), field(r, "noise_deg_pct"),
                    field(r, "missing_deg_pct"), field(r, "ece"), dp, eo});
  }
  out += table({"Dataset", "Model", "Metric", "Value", "Noise deg. %", "Missing deg. %", "ECE", "DP", "EO"}, rows);
  return out + bands(doc);
}

std::string attribution_md(const json& att) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& [stage, s] : att["per_stage"].items()) {
    rows.push_back({stage, cell(s["n"]), cell(s["avg_abs_impact"]), cell(s["min"]), cell(s["max"])});
  }
  const auto& o = att["overall"];
  rows.push_back({"**Overall**", cell(o["n"]), cell(o["avg_abs_impact"]), cell(o["min"]), cell(o["max"])});
  return table({"Stage", "N", "Avg abs impact", "Min", "Max"}, rows);
}

std::string exp4_md(const json& doc) {
  std::string out = "## Counterfactual attribution\n\nMode: " + cell(doc["mode"]) + ".\n\n";
  out += attribution_md(doc["attribution"]);
  if (doc.contains("published")) out += "\n### Published impacts\n\n" + attribution_md(doc["published"]);
  if (doc.contains("simulation_ranking")) {
    const auto& s = doc["simulation_ranking"];
    out += fmt::format("\nStage ranking held in {} of {} simulated runs.\n", cell(s["agree"]), cell(s["runs"]));
  }
  return out + bands(doc);
}

std::string bench_md(const json& doc) {
  std::string out = "## Overhead by component\n\n";
  std::vector<std::vector<std::string>> rows;
  for (const auto& c : doc["components"]) {
    rows.push_back({cell(c["component"]), cell(c["median_ms"]), cell(c["share_pct"])});
  }
  rows.push_back({"**Total**", cell(doc["total_ms"]), "-"});
  out += table({"Component", "Time (ms)", "Share (%)"}, rows);
  std::vector<std::vector<std::string>> ratios;
  for (const auto& [budget, v] : doc["reference_ratios_pct"].items()) ratios.push_back({budget, cell(v)});
  out += "\n### Relative to pipeline budgets\n\n" + table({"Budget (s)", "Overhead (%)"}, ratios);
  return out;
}

std::string quality_md(const json& doc) {
  std::string out = "## Model quality: " + cell(doc["dataset"]) + " / " + cell(doc["model"]) + "\n\n";
  std::vector<std::vector<std::string>> rows;
  for (const auto& [k, v] : doc["task"].items()) rows.push_back({k, cell(v)});
  out += table({"Metric", "Value"}, rows);
  if (!doc["robustness"].empty()) {
    std::vector<std::vector<std::string>> rob;
    for (const auto& c : doc["robustness"]) {
      rob.push_back({cell(c["kind"]), cell(c["level"]), cell(c["perturbed"]), cell(c["degradation_pct"])});
    }
    out += "\n" + table({"Perturbation", "Level", "Metric", "Degradation (%)"}, rob);
  }
  if (!doc["fairness"].empty()) {
    std::vector<std::vector<std::string>> fair;
    for (const auto& [attr, f] : doc["fairness"].items()) fair.push_back({attr, cell(f["DP"]), cell(f["EO"])});
    out += "\n" + table({"Attribute", "DP", "EO"}, fair);
  }
  if (doc.contains("calibration")) out += "\nECE: " + cell(doc["calibration"]["ece"]) + "\n";
  return out;
}

std::string counterfactual_md(const json& doc) {
  std::string out = "## Counterfactuals\n\n";
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : doc["results"]) {
    rows.push_back({cell(r["point"]["stage"]), cell(r["point"]["decision_id"]), cell(r["alternative"]),
                    r["feasible"].get<bool>() ? cell(r["delta"]) : "infeasible"});
  }
  out += table({"Stage", "Decision", "Alternative", "Impact"}, rows);
  out += "\n" + attribution_md(doc["attribution"]);
  return out;
}

}  // namespace

ReportFormat parse_report_format(std::string_view s) {
  if (s == "json") return ReportFormat::json;
  if (s == "md" || s == "markdown") return ReportFormat::markdown;
  throw ConfigError("unknown report format '" + std::string(s) + "'");
}

std::string to_markdown(const json& doc) {
  const std::string kind = doc.value("experiment", "");
  if (kind == "exp1") return exp1_md(doc);
  if (kind == "exp2") return exp2_md(doc);
  if (kind == "exp3") return exp3_md(doc);
  if (kind == "exp4") return exp4_md(doc);
  if (kind == "bench") return bench_md(doc);
  if (kind == "quality") return quality_md(doc);
  if (kind == "counterfactual") return counterfactual_md(doc);
  throw ReportError("document has no renderable experiment kind");
}

std::string emit_report(const json& doc, ReportFormat format) {
  return format == ReportFormat::json ? doc.dump(2) + "\n" : to_markdown(doc);
}

}  // namespace ea
