#include "ea/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <thread>

#include <fmt/format.h>

#include "ea/errors.hpp"
#include "ea/pipeline.hpp"
#include "ea/quality_assessor.hpp"
#include "ea/stats.hpp"

#ifndef EA_DEFAULT_DATA_DIR
#define EA_DEFAULT_DATA_DIR "data"
#endif

namespace ea {

namespace {

namespace fs = std::filesystem;

template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, n));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

std::vector<Fixture> load_fixtures(const HarnessConfig& cfg, const std::vector<std::string>& names) {
  if (names.empty()) throw ConfigError("experiment needs at least one dataset");
  std::vector<Fixture> out;
  for (const auto& n : names) out.push_back(load_fixture(cfg.data_dir, n));
  return out;
}

nlohmann::json report_row(const DetectionReport& r) {
  return {{"n", r.total()},
          {"faulty", r.tp + r.fn},
          {"tp", r.tp},
          {"fp", r.fp},
          {"fn", r.fn},
          {"tn", r.tn},
          {"precision", round_to(r.precision)},
          {"recall", round_to(r.recall)},
          {"f1", round_to(r.f1)},
          {"class_correct", r.class_correct}};
}

nlohmann::json summary_json(const std::vector<double>& v) {
  const StatsSummary s = summarize(v);
  return {{"mean", round_to(s.mean)},
          {"std", round_to(s.std)},
          {"pct_2_5", round_to(s.pct_2_5)},
          {"pct_97_5", round_to(s.pct_97_5)},
          {"width", round_to(s.pct_97_5 - s.pct_2_5)},
          {"n", s.n}};
}

nlohmann::json band(const std::string& name, double value, double low, double high) {
  return {{"name", name},
          {"value", round_to(value)},
          {"low", low},
          {"high", high},
          {"pass", value >= low && value <= high}};
}

nlohmann::json exp1(const ExperimentSpec& spec, const HarnessConfig& cfg) {
  const auto fixtures = load_fixtures(cfg, spec.datasets);
  const auto corpora = build_corpora(fixtures, cfg.injection_seed);
  AssessorConfig acfg = cfg.assessor;
  acfg.seed = spec.seeds.front();
  const DetectionRun run = run_detection(corpora, acfg);

  nlohmann::json doc{{"experiment", "exp1"},
                     {"id", 1},
                     {"seed", spec.seeds.front()},
                     {"tau", cfg.assessor.risk_threshold},
                     {"sigma_d", cfg.assessor.noise_sigma}};
  auto rows = nlohmann::json::array();
  auto findings = nlohmann::json::array();
  bool critical_all = true;
  std::map<std::string, std::size_t> fn_classes;
  for (std::size_t k = 0; k < run.per_dataset.size(); ++k) {
    const auto& [name, result] = run.per_dataset[k];
    auto row = report_row(result.report);
    row["dataset"] = name;
    rows.push_back(row);
    const auto& corpus = corpora[k];
    for (std::size_t i = 0; i < result.findings.size(); ++i) {
      const auto& f = result.findings[i];
      const Label& label = corpus.labels.at(f.decision_id);
      const std::string injected = label.fault ? std::string(to_string(*label.fault)) : "";
      findings.push_back({{"dataset", name},
                          {"decision_id", f.decision_id},
                          {"action", corpus.records[i].action},
                          {"is_faulty", label.is_faulty},
                          {"injected_class", injected},
                          {"decoy", label.decoy},
                          {"flagged", f.flagged},
                          {"predicted_class", f.predicted_class ? std::string(to_string(*f.predicted_class)) : ""},
                          {"risk", round_to(f.scores.risk)}});
      if (label.fault && is_critical(*label.fault) && (!f.flagged || f.predicted_class != label.fault)) {
        critical_all = false;
      }
      if (label.is_faulty && !f.flagged) ++fn_classes[injected];
    }
  }
  doc["datasets"] = rows;
  doc["overall"] = report_row(run.overall);
  doc["findings"] = findings;
  doc["critical_all_flagged_and_classified"] = critical_all;
  doc["false_negatives_by_class"] = fn_classes;

  auto bands = nlohmann::json::array();
  if (spec.seeds.size() >= 2) {
    const auto per_seed = detection_multi_seed(corpora, cfg.assessor, spec.seeds, cfg.threads);
    const auto& f1 = per_seed.at("f1");
    const StatsSummary s = summarize(f1);
    doc["multi_seed"] = {{"n_seeds", spec.seeds.size()},
                         {"f1", summary_json(f1)},
                         {"precision", summary_json(per_seed.at("precision"))},
                         {"recall", summary_json(per_seed.at("recall"))},
                         {"reference_f1", cfg.f1_reference},
                         {"fraction_at_least_reference", round_to(fraction_at_least(f1, cfg.f1_reference))}};
    if (cfg.assessor.noise_sigma > 0) {
      bands.push_back(band("mean_f1", s.mean, cfg.f1_band_low, cfg.f1_band_high));
      bands.push_back(band("f1_percentile_width", s.pct_97_5 - s.pct_2_5, 0.0, 0.12));
    }
  }
  doc["bands"] = bands;
  return doc;
}

nlohmann::json exp2(const ExperimentSpec& spec, const HarnessConfig& cfg) {
  const Fixture fx = load_fixture(cfg.data_dir, spec.datasets.front());
  const auto set = generate_snippet_set(fx.log.manifest, fx.log.decisions, spec.seeds.front());
  SuiteOptions opt;
  opt.judge_seed = spec.seeds.front();
  const ValidationReport rep = run_validation_suite(set.snippets, set.labels, fx.log.manifest, fx.log.decisions, opt);

  auto table = nlohmann::json::array();
  for (const auto& [label, tally] : rep.per_category) {
    nlohmann::json row{{"category", to_string(label)}, {"n", tally.total}, {"ea", tally.correct}};
    for (const auto& [name, cmp] : rep.comparisons) row[name] = cmp.per_category.at(label).correct;
    table.push_back(row);
  }
  nlohmann::json accuracy{{"ea", round_to(rep.accuracy)}};
  nlohmann::json correct{{"ea", rep.correct}};
  nlohmann::json significance = nlohmann::json::object();
  for (const auto& [name, cmp] : rep.comparisons) {
    accuracy[name] = round_to(cmp.accuracy);
    correct[name] = static_cast<std::size_t>(std::llround(cmp.accuracy * static_cast<double>(rep.total)));
    significance[name] = {{"z", round_to(cmp.test.z)}, {"p", cmp.test.p}, {"p_display", format_p(cmp.test.p)}};
  }
  auto verdicts = nlohmann::json::array();
  for (const auto& [id, v] : rep.verdicts) {
    auto j = to_json(v);
    j["snippet_id"] = id;
    j["truth"] = to_string(set.labels.at(id));
    verdicts.push_back(j);
  }
  return {{"experiment", "exp2"},
          {"id", 2},
          {"dataset", fx.data.name},
          {"seed", spec.seeds.front()},
          {"n_snippets", rep.total},
          {"table", table},
          {"correct", correct},
          {"accuracy", accuracy},
          {"wilson_95", {round_to(rep.ci_low), round_to(rep.ci_high)}},
          {"significance", significance},
          {"verdicts", verdicts},
          {"bands", nlohmann::json::array()}};
}

nlohmann::json exp3(const ExperimentSpec& spec, const HarnessConfig& cfg) {
  const auto fixtures = load_fixtures(cfg, spec.datasets);
  std::vector<nlohmann::json> reports(fixtures.size());
  std::vector<nlohmann::json> rows(fixtures.size());
  parallel_for(fixtures.size(), cfg.threads, [&](std::size_t k) {
    const Dataset& d = fixtures[k].data;
    const std::string kind = d.task == TaskKind::classification ? "logistic" : "ridge";
    const auto model = fit_reference(d, kind, spec.seeds.front());
    AssessOptions opt;
    opt.efficiency = false;
    opt.seed = spec.seeds.front();
    const QualityReport q = assess_model(*model, d, opt);
    reports[k] = to_json(q);
    double worst_noise = 0.0, worst_missing = 0.0;
    for (const auto& c : q.robustness) {
      double& w = c.kind == PerturbKind::gaussian_noise ? worst_noise : worst_missing;
      if (c.level >= (c.kind == PerturbKind::gaussian_noise ? 0.10 : 0.30) - 1e-12) w = c.degradation_pct;
    }
    nlohmann::json row{{"dataset", d.name},
                       {"model", kind},
                       {"metric", to_string(d.metric_primary)},
                       {"value", round_to(q.metrics.values.at(d.task == TaskKind::classification ? "accuracy" : "rmse"))},
                       {"noise_deg_pct", round_to(worst_noise, 2)},
                       {"missing_deg_pct", round_to(worst_missing, 2)}};
    if (q.calibration) row["ece"] = round_to(q.calibration->ece);
    for (const auto& [attr, f] : q.fairness) {
      row["dp_" + attr] = round_to(f.dp);
      row["eo_" + attr] = round_to(f.eo);
    }
    rows[k] = row;
  });
  return {{"experiment", "exp3"}, {"id", 3}, {"seed", spec.seeds.front()}, {"table", rows}, {"reports", reports},
          {"bands", nlohmann::json::array()}};
}

nlohmann::json exp4(const ExperimentSpec& spec, const HarnessConfig& cfg) {
  nlohmann::json doc{{"experiment", "exp4"}, {"id", 4}, {"mode", cfg.counterfactual_mode}, {"seed", spec.seeds.front()}};
  std::vector<CounterfactualResult> results;
  if (cfg.counterfactual_mode == "reexec") {
    const auto fixtures = load_fixtures(cfg, spec.datasets);
    for (const auto& fx : fixtures) {
      AssessorConfig acfg = cfg.assessor;
      acfg.seed = spec.seeds.front();
      const auto findings = audit_log(fx.log, acfg);
      CounterfactualOptions opt;
      opt.cap = cfg.cap;
      opt.max_alternatives = cfg.max_alternatives;
      opt.seed = spec.seeds.front();
      opt.threads = cfg.threads;
      auto r = run_counterfactuals(fx.data, fx.log, findings, opt);
      results.insert(results.end(), r.begin(), r.end());
    }
  } else if (cfg.counterfactual_mode == "simulate") {
    results = simulate_impacts(default_impact_params(), cfg.simulation_n, spec.seeds.front());
  } else {
    throw ConfigError("counterfactual mode must be reexec or simulate");
  }
  auto arr = nlohmann::json::array();
  for (auto& r : results) {
    r.metric_original = round_to(r.metric_original, 6);
    r.metric_alternative = round_to(r.metric_alternative, 6);
    r.delta = round_to(r.delta, 4);
    arr.push_back(to_json(r));
  }
  doc["results"] = arr;
  doc["n_counterfactuals"] = results.size();
  auto rounded = [](nlohmann::json j) {
    for (auto* group : {&j["per_stage"], &j["per_dataset"]}) {
      for (auto& [k, s] : group->items()) {
        for (const char* f : {"avg_abs_impact", "mean_impact", "min", "max"}) s[f] = round_to(s[f].get<double>());
      }
    }
    for (const char* f : {"avg_abs_impact", "mean_impact", "min", "max"}) {
      j["overall"][f] = round_to(j["overall"][f].get<double>());
    }
    return j;
  };
  doc["attribution"] = rounded(to_json(attribute(results)));
  doc["ranking"] = stage_ranking(attribute(results));

  const fs::path published = fs::path(cfg.data_dir) / "published_impacts.json";
  if (fs::exists(published)) {
    const auto impacts = impacts_from_json(nlohmann::json::parse(read_file(published.string())));
    doc["published"] = rounded(to_json(attribute(impacts)));
  }

  auto bands = nlohmann::json::array();
  if (spec.seeds.size() >= 2) {
    const auto ok = simulation_rankings(default_impact_params(), cfg.simulation_n, spec.seeds, cfg.threads);
    const auto agree = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), true));
    doc["simulation_ranking"] = {{"runs", ok.size()}, {"agree", agree}};
    nlohmann::json b{{"name", "ranking_agreement"},
                     {"value", agree},
                     {"low", static_cast<double>(cfg.ranking_min_agree_per_500) / 500.0 * static_cast<double>(ok.size())},
                     {"high", ok.size()}};
    b["pass"] = agree * 500 >= cfg.ranking_min_agree_per_500 * ok.size();
    bands.push_back(b);
  }
  doc["bands"] = bands;
  return doc;
}

template <class Fn>
ComponentTiming time_component(const std::string& name, std::size_t iterations, std::size_t warmup, Fn&& fn) {
  using clock = std::chrono::steady_clock;
  constexpr double min_batch_seconds = 5e-5;
  auto run_batch = [&](std::size_t reps) {
    const auto t0 = clock::now();
    for (std::size_t r = 0; r < reps; ++r) fn();
    return std::chrono::duration<double>(clock::now() - t0).count();
  };
  for (std::size_t w = 0; w < warmup; ++w) run_batch(1);
  std::size_t reps = 1;
  while (run_batch(reps) < min_batch_seconds && reps < (1u << 16)) reps *= 2;
  std::vector<double> per_call;
  for (std::size_t i = 0; i < std::max<std::size_t>(1, iterations); ++i) {
    per_call.push_back(run_batch(reps) / static_cast<double>(reps) * 1000.0);
  }
  std::sort(per_call.begin(), per_call.end());
  const std::size_t n = per_call.size();
  ComponentTiming t;
  t.name = name;
  t.median_ms = n % 2 ? per_call[n / 2] : (per_call[n / 2 - 1] + per_call[n / 2]) / 2.0;
  t.amplified = reps > 1;
  return t;
}

}  // namespace

const std::vector<std::string>& default_datasets() {
  static const std::vector<std::string> names{"german_credit", "adult_income", "titanic", "diabetes", "ca_housing"};
  return names;
}

std::string default_data_dir() {
  if (const char* env = std::getenv("EA_DATA_DIR"); env && *env) return env;
  return EA_DEFAULT_DATA_DIR;
}

Dataset load_dataset(const std::string& csv_path, const std::string& schema_path) {
  if (!fs::exists(csv_path)) throw ConfigError("dataset file not found: " + csv_path);
  if (!fs::exists(schema_path)) throw ConfigError("schema file not found: " + schema_path);
  nlohmann::json schema_json;
  try {
    schema_json = nlohmann::json::parse(read_file(schema_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.byte, "schema is not valid JSON: " + schema_path);
  }
  Dataset d = load_csv(read_file(csv_path), schema_from_json(schema_json));
  validate_dataset(d);
  return d;
}

Fixture load_fixture(const std::string& dir, const std::string& name) {
  const fs::path base(dir);
  const fs::path log_path = base / "logs" / (name + ".json");
  if (!fs::exists(base / (name + ".csv"))) throw ConfigError("no fixture for dataset '" + name + "' in " + dir);
  if (!fs::exists(log_path)) throw ConfigError("no decision log for dataset '" + name + "' in " + dir);
  Fixture fx;
  fx.data = load_dataset((base / (name + ".csv")).string(), (base / (name + ".schema.json")).string());
  fx.log = load_run_log(read_file(log_path.string()));
  return fx;
}

std::string_view to_string(Preset p) {
  switch (p) {
    case Preset::minimal:
      return "minimal";
    case Preset::standard:
      return "standard";
    case Preset::full:
      return "full";
  }
  return "full";
}

Preset parse_preset(std::string_view s) {
  if (s == "minimal") return Preset::minimal;
  if (s == "standard") return Preset::standard;
  if (s == "full") return Preset::full;
  throw ConfigError("unknown preset '" + std::string(s) + "'");
}

bool preset_allows(Preset p, int id) {
  switch (p) {
    case Preset::minimal:
      return id == 1;
    case Preset::standard:
      return id >= 1 && id <= 3;
    case Preset::full:
      return id >= 1 && id <= 4;
  }
  return false;
}

HarnessConfig apply_overrides(HarnessConfig c, const nlohmann::json& o) {
  if (o.is_null()) return c;
  if (!o.is_object()) throw ConfigError("config overrides must be a JSON object");
  try {
    for (const auto& [key, v] : o.items()) {
      if (key == "data_dir") {
        c.data_dir = v.get<std::string>();
      } else if (key == "datasets") {
        c.datasets = v.get<std::vector<std::string>>();
      } else if (key == "seeds") {
        c.seeds = v.get<std::vector<std::uint64_t>>();
      } else if (key == "n_seeds") {
        c.seeds.clear();
        for (std::uint64_t s = 0; s < v.get<std::uint64_t>(); ++s) c.seeds.push_back(s);
      } else if (key == "preset") {
        c.preset = parse_preset(v.get<std::string>());
      } else if (key == "tau") {
        c.assessor.risk_threshold = v.get<double>();
      } else if (key == "sigma_d") {
        c.assessor.noise_sigma = v.get<double>();
      } else if (key == "injection_seed") {
        c.injection_seed = v.get<std::uint64_t>();
      } else if (key == "counterfactual_mode") {
        c.counterfactual_mode = v.get<std::string>();
      } else if (key == "cap") {
        c.cap = v.get<std::size_t>();
      } else if (key == "max_alternatives") {
        c.max_alternatives = v.get<std::size_t>();
      } else if (key == "simulation_n") {
        c.simulation_n = v.get<std::size_t>();
      } else if (key == "threads") {
        c.threads = v.get<std::size_t>();
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  check_config(c.assessor);
  if (c.seeds.empty()) throw ConfigError("config needs at least one seed");
  if (c.counterfactual_mode != "reexec" && c.counterfactual_mode != "simulate") {
    throw ConfigError("counterfactual_mode must be reexec or simulate");
  }
  return c;
}

nlohmann::json run_experiment(const ExperimentSpec& spec_in, const HarnessConfig& base) {
  const HarnessConfig cfg = apply_overrides(base, spec_in.overrides);
  ExperimentSpec spec = spec_in;
  if (spec.datasets.empty()) spec.datasets = cfg.datasets;
  if (spec.seeds.empty()) spec.seeds = cfg.seeds;
  if (spec.seeds.empty()) throw ConfigError("experiment needs at least one seed");
  if (spec.id < 1 || spec.id > 4) throw ConfigError("unknown experiment id " + std::to_string(spec.id));
  if (!preset_allows(cfg.preset, spec.id)) {
    throw ConfigError(fmt::format("experiment {} is disabled by preset {}", spec.id, to_string(cfg.preset)));
  }
  switch (spec.id) {
    case 1:
      return exp1(spec, cfg);
    case 2:
      return exp2(spec, cfg);
    case 3:
      return exp3(spec, cfg);
    default:
      return exp4(spec, cfg);
  }
}

bool bands_pass(const nlohmann::json& doc) {
  if (!doc.contains("bands")) return true;
  return std::all_of(doc["bands"].begin(), doc["bands"].end(),
                     [](const nlohmann::json& b) { return b.value("pass", false); });
}

std::vector<LabeledCorpus> build_corpora(const std::vector<Fixture>& fixtures, std::uint64_t injection_seed) {
  std::vector<LabeledCorpus> out;
  for (const auto& fx : fixtures) {
    InjectionPlan plan;
    plan.dataset_id = fx.log.manifest.dataset_id;
    plan.class_mix = replica_mix(plan.dataset_id);
    plan.seed = injection_seed;
    out.push_back(inject(fx.log.manifest, fx.log.decisions, plan));
  }
  return out;
}

DetectionRun run_detection(const std::vector<LabeledCorpus>& corpora, const AssessorConfig& cfg) {
  DetectionRun run;
  std::vector<DetectionReport> reports;
  for (const auto& c : corpora) {
    run.per_dataset.emplace_back(c.manifest.dataset_id, audit_corpus(c, cfg));
    reports.push_back(run.per_dataset.back().second.report);
  }
  run.overall = pool_reports(reports);
  return run;
}

std::map<std::string, std::vector<double>> detection_multi_seed(const std::vector<LabeledCorpus>& corpora,
                                                                const AssessorConfig& cfg,
                                                                const std::vector<std::uint64_t>& seeds,
                                                                std::size_t threads) {
  std::vector<DetectionReport> per_seed(seeds.size());
  parallel_for(seeds.size(), threads, [&](std::size_t i) {
    AssessorConfig c = cfg;
    c.seed = seeds[i];
    per_seed[i] = run_detection(corpora, c).overall;
  });
  std::map<std::string, std::vector<double>> out;
  for (const auto& r : per_seed) {
    out["f1"].push_back(r.f1);
    out["precision"].push_back(r.precision);
    out["recall"].push_back(r.recall);
  }
  return out;
}

double fraction_at_least(const std::vector<double>& values, double reference) {
  if (values.empty()) return 0.0;
  const auto n = std::count_if(values.begin(), values.end(), [&](double v) { return v >= reference - 1e-12; });
  return static_cast<double>(n) / static_cast<double>(values.size());
}

std::vector<bool> simulation_rankings(const std::map<Stage, StageImpactParams>& params, std::size_t n,
                                      const std::vector<std::uint64_t>& seeds, std::size_t threads) {
  std::vector<char> ok(seeds.size(), 0);
  parallel_for(seeds.size(), threads, [&](std::size_t i) {
    const auto rep = attribute(simulate_impacts(params, n, seeds[i]));
    ok[i] = stage_ranking(rep) == std::vector<std::string>{"model_selection", "feature_engineering", "preprocessing"};
  });
  return {ok.begin(), ok.end()};
}

std::map<std::string, double> reference_ratios(double total_ms, const std::vector<double>& budgets_s) {
  std::map<std::string, double> out;
  for (double b : budgets_s) {
    if (!(b > 0)) throw ArgError("reference budget must be positive");
    out[fmt::format("{}", b)] = total_ms / (b * 1000.0) * 100.0;
  }
  return out;
}

OverheadReport make_overhead_report(std::vector<ComponentTiming> components) {
  OverheadReport r;
  for (const auto& c : components) r.total_ms += c.median_ms;
  for (auto& c : components) c.share_pct = r.total_ms > 0 ? c.median_ms / r.total_ms * 100.0 : 0.0;
  r.components = std::move(components);
  r.reference_ratios = reference_ratios(r.total_ms);
  return r;
}

OverheadReport bench_overhead(const Fixture& fx, const HarnessConfig& cfg, std::size_t iterations, std::size_t warmup,
                              bool robustness, const std::string& model_kind) {
  const std::uint64_t seed = cfg.seeds.front();
  AssessorConfig acfg = cfg.assessor;
  acfg.seed = seed;
  InjectionPlan plan;
  plan.dataset_id = fx.log.manifest.dataset_id;
  plan.class_mix = replica_mix(plan.dataset_id);
  plan.seed = cfg.injection_seed;
  const LabeledCorpus corpus = inject(fx.log.manifest, fx.log.decisions, plan);

  std::vector<ComponentTiming> parts;
  parts.push_back(time_component("decision_assessor", iterations, warmup, [&] { (void)audit_corpus(corpus, acfg); }));

  if (preset_allows(cfg.preset, 2)) {
    const auto set = generate_snippet_set(fx.log.manifest, fx.log.decisions, seed);
    parts.push_back(time_component("reasoning_validator", iterations, warmup, [&] {
      for (const auto& s : set.snippets) (void)validate(s, fx.log.manifest, fx.log.decisions);
    }));
  }
  if (preset_allows(cfg.preset, 3)) {
    const auto model = fit_reference(fx.data, model_kind, seed);
    AssessOptions opt;
    opt.robustness = robustness;
    opt.efficiency = false;
    opt.seed = seed;
    parts.push_back(time_component("quality_assessor", iterations, warmup,
                                   [&] { (void)assess_model(*model, fx.data, opt); }));
  }
  if (preset_allows(cfg.preset, 4)) {
    const auto findings = audit_log(fx.log, acfg);
    parts.push_back(time_component("counterfactual", iterations, warmup, [&] {
      const StagePlan sp = plan_from_log(fx.log);
      for (const auto& p : identify_points(sp, findings, cfg.cap)) {
        (void)enumerate_alternatives(sp, p, fx.data, cfg.max_alternatives);
      }
      (void)attribute(simulate_impacts(default_impact_params(), cfg.simulation_n, seed));
    }));
  }
  return make_overhead_report(std::move(parts));
}

nlohmann::json to_json(const OverheadReport& r) {
  auto comps = nlohmann::json::array();
  for (const auto& c : r.components) {
    nlohmann::json j{{"component", c.name}, {"median_ms", round_to(c.median_ms, 4)},
                     {"share_pct", round_to(c.share_pct, 2)}};
    j["tags"] = c.amplified ? nlohmann::json::array({"amplified"}) : nlohmann::json::array();
    comps.push_back(j);
  }
  nlohmann::json ratios = nlohmann::json::object();
  for (const auto& [k, v] : r.reference_ratios) ratios[k] = round_to(v, 6);
  return {{"components", comps}, {"total_ms", round_to(r.total_ms, 4)}, {"reference_ratios_pct", ratios}};
}

double round_to(double v, int digits) {
  const double scale = std::pow(10.0, digits);
  const double r = std::round(v * scale) / scale;
  return r == 0.0 ? 0.0 : r;
}

}  // namespace ea
