// Command-line entry point. Exit codes: 0 success, 1 error, 2 acceptance-band failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ea/counterfactual.hpp"
#include "ea/dataset.hpp"
#include "ea/decision_assessor.hpp"
#include "ea/errors.hpp"
#include "ea/external_predictor.hpp"
#include "ea/fault_catalog.hpp"
#include "ea/harness.hpp"
#include "ea/quality_assessor.hpp"
#include "ea/reasoning_validator.hpp"
#include "ea/report.hpp"

namespace {

using namespace ea;
using nlohmann::json;
namespace fs = std::filesystem;

json read_json(const std::string& path) {
  if (!fs::exists(path)) throw ConfigError("file not found: " + path);
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(e.byte, path + " is not valid JSON");
  }
}

RunLog read_log(const std::string& path) {
  if (!fs::exists(path)) throw ConfigError("file not found: " + path);
  return load_run_log(read_file(path));
}

void emit(const json& doc, const std::string& format, const std::string& out) {
  const std::string text = emit_report(doc, parse_report_format(format));
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_file(out, text);
  }
}

std::vector<std::string> split_command(const std::string& cmd) {
  std::istringstream in(cmd);
  std::vector<std::string> out;
  for (std::string part; in >> part;) out.push_back(part);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decision-centric audit engine for agent-driven AutoML pipelines"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON file with harness overrides");

  std::string format = "json";
  std::string out;
  std::uint64_t seed = 0;

  // inject
  auto* inject_cmd = app.add_subcommand("inject", "Plant labeled faults into a clean decision log");
  std::string inject_log, labels_out;
  std::size_t n_faulty = 15, n_decoys = 2;
  inject_cmd->add_option("--log", inject_log, "Clean run log")->required();
  inject_cmd->add_option("--seed", seed);
  inject_cmd->add_option("--n-faulty", n_faulty, "Uses the replica mix when it matches the dataset");
  inject_cmd->add_option("--n-decoys", n_decoys);
  inject_cmd->add_option("--out", out, "Faulty log path (stdout when omitted)");
  inject_cmd->add_option("--labels", labels_out, "Ground-truth labels path")->required();

  // audit
  auto* audit_cmd = app.add_subcommand("audit", "Score every decision of a log");
  std::string audit_log_path, audit_labels;
  double tau = -1, sigma = -1;
  audit_cmd->add_option("--log", audit_log_path)->required();
  audit_cmd->add_option("--labels", audit_labels, "Ground truth; adds a detection report");
  audit_cmd->add_option("--tau", tau);
  audit_cmd->add_option("--sigma", sigma);
  audit_cmd->add_option("--seed", seed);
  audit_cmd->add_option("--out", out);

  // validate-reasoning
  auto* vr_cmd = app.add_subcommand("validate-reasoning", "Check reasoning snippets against logged artifacts");
  std::string vr_log, vr_snippets, vr_generate;
  vr_cmd->add_option("--log", vr_log)->required();
  vr_cmd->add_option("--snippets", vr_snippets, "Snippet file with truth labels");
  vr_cmd->add_option("--generate", vr_generate, "Write a generated snippet set here instead of validating");
  vr_cmd->add_option("--seed", seed);
  vr_cmd->add_option("--format", format)->check(CLI::IsMember({"json", "md"}));
  vr_cmd->add_option("--out", out);

  // assess-model
  auto* am_cmd = app.add_subcommand("assess-model", "Quality report for a reference or external model");
  std::string data_path, schema_path, model = "auto", external_cmd, grid = "default", timing_path;
  am_cmd->add_option("--data", data_path)->required();
  am_cmd->add_option("--schema", schema_path)->required();
  am_cmd->add_option("--model", model)->check(CLI::IsMember({"auto", "logistic", "ridge", "gbt_stumps", "external"}));
  am_cmd->add_option("--external-cmd", external_cmd, "Command line of an external predictor");
  am_cmd->add_option("--grid", grid)->check(CLI::IsMember({"default", "none"}));
  am_cmd->add_option("--seed", seed);
  am_cmd->add_option("--timing", timing_path, "Write throughput measurements here");
  am_cmd->add_option("--format", format)->check(CLI::IsMember({"json", "md"}));
  am_cmd->add_option("--out", out);

  // counterfactual
  auto* cf_cmd = app.add_subcommand("counterfactual", "Attribute metric changes to alternative decisions");
  std::string cf_log, mode = "reexec";
  std::size_t cf_threads = 1;
  cf_cmd->add_option("--log", cf_log)->required();
  cf_cmd->add_option("--data", data_path);
  cf_cmd->add_option("--schema", schema_path);
  cf_cmd->add_option("--mode", mode)->check(CLI::IsMember({"reexec", "simulate"}));
  cf_cmd->add_option("--seed", seed);
  cf_cmd->add_option("--threads", cf_threads);
  cf_cmd->add_option("--format", format)->check(CLI::IsMember({"json", "md"}));
  cf_cmd->add_option("--out", out);

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "Run one of the four experiments");
  int exp_id = 1;
  std::string preset;
  std::size_t n_seeds = 0, threads = 0;
  exp_cmd->add_option("--id", exp_id)->required()->check(CLI::Range(1, 4));
  exp_cmd->add_option("--preset", preset)->check(CLI::IsMember({"minimal", "standard", "full"}));
  exp_cmd->add_option("--seeds", n_seeds, "Run seeds 0..N-1");
  exp_cmd->add_option("--threads", threads);
  exp_cmd->add_option("--mode", mode, "Counterfactual mode for experiment 4")
      ->check(CLI::IsMember({"reexec", "simulate"}));
  exp_cmd->add_option("--out", out, "Directory for the report file (stdout when omitted)");
  exp_cmd->add_option("--format", format)->check(CLI::IsMember({"json", "md"}));

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Per-component overhead benchmark");
  std::size_t iterations = 10, warmup = 3;
  std::string bench_dataset = "adult_income";
  bool no_robustness = false;
  bench_cmd->add_option("--iterations", iterations);
  bench_cmd->add_option("--warmup", warmup);
  bench_cmd->add_option("--dataset", bench_dataset);
  bench_cmd->add_option("--preset", preset)->check(CLI::IsMember({"minimal", "standard", "full"}));
  std::string bench_model = "gbt_stumps";
  bench_cmd->add_flag("--no-robustness", no_robustness);
  bench_cmd->add_option("--model", bench_model, "Reference model evaluated by the quality assessor")
      ->check(CLI::IsMember({"logistic", "ridge", "gbt_stumps"}));
  bench_cmd->add_option("--format", format)->check(CLI::IsMember({"json", "md"}));
  bench_cmd->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    HarnessConfig cfg;
    if (!config_path.empty()) cfg = apply_overrides(cfg, read_json(config_path));

    if (*inject_cmd) {
      const RunLog clean = read_log(inject_log);
      InjectionPlan plan;
      plan.dataset_id = clean.manifest.dataset_id;
      plan.class_mix = replica_mix(plan.dataset_id);
      plan.n_faulty = n_faulty;
      plan.n_decoys = n_decoys;
      plan.n_clean = clean.decisions.size() - n_faulty;
      plan.seed = seed;
      const LabeledCorpus corpus = inject(clean.manifest, clean.decisions, plan);
      const RunLog faulty{corpus.manifest, corpus.records};
      write_file(labels_out, labels_to_json(corpus).dump(2) + "\n");
      if (out.empty()) {
        std::cout << serialize_run_log(faulty);
      } else {
        write_file(out, serialize_run_log(faulty));
      }
      return 0;
    }

    if (*audit_cmd) {
      AssessorConfig acfg = cfg.assessor;
      if (tau >= 0) acfg.risk_threshold = tau;
      if (sigma >= 0) acfg.noise_sigma = sigma;
      acfg.seed = seed;
      check_config(acfg);
      const RunLog log = read_log(audit_log_path);
      json doc;
      if (!audit_labels.empty()) {
        LabeledCorpus corpus{log.manifest, log.decisions, labels_from_json(read_json(audit_labels))};
        const AuditResult res = audit_corpus(corpus, acfg);
        doc["report"] = to_json(res.report);
        for (const auto& f : res.findings) doc["findings"].push_back(to_json(f));
      } else {
        doc["findings"] = json::array();
        for (const auto& f : audit_log(log, acfg)) doc["findings"].push_back(to_json(f));
      }
      emit(doc, "json", out);
      return 0;
    }

    if (*vr_cmd) {
      const RunLog log = read_log(vr_log);
      if (!vr_generate.empty()) {
        write_file(vr_generate, serialize_snippet_file(generate_snippet_set(log.manifest, log.decisions, seed)));
        return 0;
      }
      if (vr_snippets.empty()) throw ConfigError("validate-reasoning needs --snippets or --generate");
      const LabeledSnippets set = load_snippet_file(read_file(vr_snippets));
      SuiteOptions opt;
      opt.judge_seed = seed;
      const ValidationReport rep = run_validation_suite(set.snippets, set.labels, log.manifest, log.decisions, opt);
      json doc = to_json(rep);
      if (format == "md") {
        std::string md = "## Reasoning validation\n\n| Snippet | Verdict |\n|---|---|\n";
        for (const auto& [id, v] : rep.verdicts) {
          const SnippetLabel l = v.valid || !v.category ? SnippetLabel::valid : *v.category;
          md += "| " + id + " | " + std::string(to_string(l)) + " |\n";
        }
        md += "\nAccuracy: " + json(rep.accuracy).dump() + "\n";
        if (out.empty()) std::cout << md; else write_file(out, md);
        return 0;
      }
      emit(doc, "json", out);
      return 0;
    }

    if (*am_cmd) {
      const Dataset d = load_dataset(data_path, schema_path);
      std::unique_ptr<Predictor> predictor;
      if (model == "external") {
        if (external_cmd.empty()) throw ConfigError("--model external needs --external-cmd");
        predictor = std::make_unique<ExternalPredictor>(split_command(external_cmd), d.task);
      } else {
        const std::string kind =
            model != "auto" ? model : (d.task == TaskKind::classification ? "logistic" : "ridge");
        predictor = fit_reference(d, kind, seed);
      }
      AssessOptions opt;
      opt.seed = seed;
      opt.robustness = grid == "default";
      opt.efficiency = !timing_path.empty();
      const QualityReport q = assess_model(*predictor, d, opt);
      json doc = to_json(q);
      doc["experiment"] = "quality";
      if (q.efficiency) write_file(timing_path, efficiency_json(*q.efficiency).dump(2) + "\n");
      emit(doc, format, out);
      return 0;
    }

    if (*cf_cmd) {
      const RunLog log = read_log(cf_log);
      std::vector<CounterfactualResult> results;
      if (mode == "simulate") {
        results = simulate_impacts(default_impact_params(), cfg.simulation_n, seed);
      } else {
        if (data_path.empty() || schema_path.empty()) throw ConfigError("reexec mode needs --data and --schema");
        const Dataset d = load_dataset(data_path, schema_path);
        AssessorConfig acfg = cfg.assessor;
        acfg.seed = seed;
        CounterfactualOptions opt;
        opt.cap = cfg.cap;
        opt.max_alternatives = cfg.max_alternatives;
        opt.seed = seed;
        opt.threads = cf_threads;
        results = run_counterfactuals(d, log, audit_log(log, acfg), opt);
      }
      json doc{{"experiment", "counterfactual"}, {"mode", mode}};
      doc["results"] = json::array();
      for (const auto& r : results) doc["results"].push_back(to_json(r));
      doc["attribution"] = to_json(attribute(results));
      emit(doc, format, out);
      return 0;
    }

    if (*exp_cmd) {
      if (!preset.empty()) cfg.preset = parse_preset(preset);
      if (threads > 0) cfg.threads = threads;
      if (exp_cmd->count("--mode")) cfg.counterfactual_mode = mode;
      ExperimentSpec spec;
      spec.id = exp_id;
      if (n_seeds > 0) {
        for (std::uint64_t s = 0; s < n_seeds; ++s) spec.seeds.push_back(s);
      }
      const json doc = run_experiment(spec, cfg);
      if (!out.empty()) {
        fs::create_directories(out);
        const std::string ext = format == "json" ? ".json" : ".md";
        emit(doc, format, (fs::path(out) / ("exp" + std::to_string(exp_id) + ext)).string());
      } else {
        emit(doc, format, "");
      }
      return bands_pass(doc) ? 0 : 2;
    }

    if (*bench_cmd) {
      if (!preset.empty()) cfg.preset = parse_preset(preset);
      const Fixture fx = load_fixture(cfg.data_dir, bench_dataset);
      json doc = to_json(bench_overhead(fx, cfg, iterations, warmup, !no_robustness, bench_model));
      doc["experiment"] = "bench";
      doc["dataset"] = bench_dataset;
      doc["model"] = bench_model;
      doc["iterations"] = iterations;
      doc["warmup"] = warmup;
      emit(doc, format, out);
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ea: %s\n", e.what());
    return 1;
  }
  return 0;
}
