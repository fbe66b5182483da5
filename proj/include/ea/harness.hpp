#pragma once

// Experiment orchestration: fixture loading, the four experiments, multi-seed studies and the
// per-component overhead benchmark. Documents are JSON; report.hpp renders them as Markdown.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ea/counterfactual.hpp"
#include "ea/dataset.hpp"
#include "ea/decision_assessor.hpp"
#include "ea/decision_log.hpp"
#include "ea/reasoning_validator.hpp"

namespace ea {

/// The five bundled datasets in report order.
const std::vector<std::string>& default_datasets();

/// EA_DATA_DIR when set, otherwise the directory configured at build time.
std::string default_data_dir();

struct Fixture {
  Dataset data;
  RunLog log;
};

/// Reads <dir>/<name>.csv, <dir>/<name>.schema.json and <dir>/logs/<name>.json.
/// Throws ConfigError when any piece is missing.
Fixture load_fixture(const std::string& dir, const std::string& name);
Dataset load_dataset(const std::string& csv_path, const std::string& schema_path);

enum class Preset { minimal, standard, full };
std::string_view to_string(Preset p);
Preset parse_preset(std::string_view s);
/// Experiments a preset enables: minimal {1}, standard {1,2,3}, full {1,2,3,4}.
bool preset_allows(Preset p, int experiment_id);

struct HarnessConfig {
  std::string data_dir = default_data_dir();
  std::vector<std::string> datasets = default_datasets();
  std::vector<std::uint64_t> seeds{0};
  Preset preset = Preset::full;
  AssessorConfig assessor;
  /// Injection layout is fixed across seeds; only scoring noise varies with the run seed.
  std::uint64_t injection_seed = 0;
  std::string counterfactual_mode = "reexec";  // reexec | simulate
  std::size_t cap = 3;
  std::size_t max_alternatives = 3;
  std::size_t simulation_n = 15;
  std::size_t threads = 1;
  /// Detection F1 band for multi-seed runs and the minimum ranking agreement for simulation.
  double f1_band_low = 0.872;
  double f1_band_high = 0.918;
  double f1_reference = 0.919;
  std::size_t ranking_min_agree_per_500 = 499;
};

/// Applies overrides from a JSON object. Unknown keys throw ConfigError.
HarnessConfig apply_overrides(HarnessConfig base, const nlohmann::json& overrides);

struct ExperimentSpec {
  int id = 1;
  std::vector<std::string> datasets;
  std::vector<std::uint64_t> seeds;
  nlohmann::json overrides = nlohmann::json::object();
};

/// Deterministic document for one experiment. Throws ConfigError for an unknown id, a dataset
/// without fixtures, or an experiment the preset disables.
nlohmann::json run_experiment(const ExperimentSpec& spec, const HarnessConfig& config);

/// True when every acceptance band recorded in the document passed.
bool bands_pass(const nlohmann::json& document);

/// Exp 1 for one seed; corpora are built once and reused across seeds.
struct DetectionRun {
  std::vector<std::pair<std::string, AuditResult>> per_dataset;
  std::vector<LabeledCorpus> corpora;
  DetectionReport overall;
};

std::vector<LabeledCorpus> build_corpora(const std::vector<Fixture>& fixtures, std::uint64_t injection_seed);
DetectionRun run_detection(const std::vector<LabeledCorpus>& corpora, const AssessorConfig& cfg);

/// Per-seed metric vectors computed on `threads` workers; results are ordered by seed.
std::map<std::string, std::vector<double>> detection_multi_seed(const std::vector<LabeledCorpus>& corpora,
                                                                const AssessorConfig& cfg,
                                                                const std::vector<std::uint64_t>& seeds,
                                                                std::size_t threads);

/// Fraction of values >= reference.
double fraction_at_least(const std::vector<double>& values, double reference);

/// Per-seed simulation: whether model_selection > feature_engineering > preprocessing held.
std::vector<bool> simulation_rankings(const std::map<Stage, StageImpactParams>& params, std::size_t n,
                                      const std::vector<std::uint64_t>& seeds, std::size_t threads);

struct ComponentTiming {
  std::string name;
  double median_ms = 0.0;
  double share_pct = 0.0;
  bool amplified = false;
};

struct OverheadReport {
  std::vector<ComponentTiming> components;
  double total_ms = 0.0;
  std::map<std::string, double> reference_ratios;  // budget seconds -> overhead percent
};

/// overhead % = total_ms / (budget_s * 1000) * 100, keyed by the budget in seconds.
std::map<std::string, double> reference_ratios(double total_ms, const std::vector<double>& budgets_s = {300, 600, 3600});

/// Fills shares and ratios from component medians.
OverheadReport make_overhead_report(std::vector<ComponentTiming> components);

/// Times each enabled component on one fixture (I/O excluded) with warm-up rounds. The quality
/// assessor evaluates a reference model of kind `model` (see fit_reference).
OverheadReport bench_overhead(const Fixture& fixture, const HarnessConfig& config, std::size_t iterations = 10,
                              std::size_t warmup = 3, bool robustness = true,
                              const std::string& model = "gbt_stumps");

nlohmann::json to_json(const OverheadReport& r);

/// Rounds to `digits` decimals so rendered tables can reuse the stored values verbatim.
double round_to(double v, int digits = 4);

}  // namespace ea
