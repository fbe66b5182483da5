#pragma once

// Model quality beyond accuracy: task metrics, robustness under perturbations,
// group fairness, calibration and inference throughput.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ea/dataset.hpp"
#include "ea/metrics.hpp"
#include "ea/pipeline.hpp"

namespace ea {

struct TaskMetrics {
  std::map<std::string, double> values;  // accuracy,f1,auc | rmse,mae,r2
  std::vector<std::string> warnings;
};

/// Metrics of test-row scores against the dataset target.
TaskMetrics task_metrics(const Dataset& d, std::span<const double> test_scores);
TaskMetrics task_metrics(const Predictor& p, const Dataset& d);

/// Throws SpecError for regression tasks, unknown attributes or fewer than two groups in test.
FairnessResult fairness_metrics(const Predictor& p, const Dataset& d, const std::string& attr);
/// Throws SpecError for regression tasks.
CalibrationResult calibration(const Predictor& p, const Dataset& d, std::size_t n_bins = 10);

enum class PerturbKind { gaussian_noise, missingness };
std::string_view to_string(PerturbKind k);
PerturbKind parse_perturb_kind(std::string_view s);

struct PerturbationSpec {
  PerturbKind kind = PerturbKind::gaussian_noise;
  double level = 0.0;
  std::uint64_t seed = 0;
  /// Restricts missingness to these feature columns; empty means every feature column.
  std::vector<std::string> columns;
};

/// Perturbs test rows only. Noise: N(0, (level * train std)^2) on numeric features.
/// Missingness: MCAR removal at rate `level`, then train mean / mode imputation.
/// Draws are shared across levels (common random numbers), so severity is monotone per cell.
/// Throws SpecError on a level outside [0,1] or noise without numeric features.
Dataset perturb(const Dataset& d, const PerturbationSpec& spec, std::size_t* removed_cells = nullptr);

struct GridCell {
  PerturbKind kind;
  double level;
};

/// Noise {0.01, 0.05, 0.10} and missingness {0.10, 0.20, 0.30}.
std::vector<GridCell> default_grid();

struct RobustnessCell {
  PerturbKind kind;
  double level = 0.0;
  double base = 0.0;       // accuracy (classification) or RMSE (regression)
  double perturbed = 0.0;
  double degradation_pct = 0.0;
};

/// Classification: (base - perturbed) / base * 100 on accuracy.
/// Regression: (perturbed - base) / base * 100 on RMSE.
double degradation_pct(TaskKind task, double base, double perturbed);

std::vector<RobustnessCell> robustness_suite(const Predictor& p, const Dataset& d, const std::vector<GridCell>& grid,
                                             std::uint64_t seed);

struct EfficiencyResult {
  double throughput = 0.0;  // samples per second
  double median_seconds = 0.0;
  std::size_t batch_rows = 0;
  std::size_t repeats = 0;
  bool amplified = false;
};

/// Median over `repeats` timed full-test predictions after one warm-up call. When the batch
/// finishes faster than the timer can resolve reliably, test rows are replicated and the result
/// is tagged amplified.
EfficiencyResult efficiency(const Predictor& p, const Dataset& d, std::size_t repeats = 5);

struct AssessOptions {
  std::vector<GridCell> grid = default_grid();
  bool robustness = true;
  bool efficiency = true;
  std::size_t calibration_bins = 10;
  std::size_t efficiency_repeats = 5;
  std::uint64_t seed = 0;
};

struct QualityReport {
  std::string dataset;
  std::string model;
  TaskKind task = TaskKind::classification;
  TaskMetrics metrics;
  std::vector<RobustnessCell> robustness;
  std::map<std::string, FairnessResult> fairness;
  std::optional<CalibrationResult> calibration;
  std::optional<EfficiencyResult> efficiency;
};

QualityReport assess_model(const Predictor& p, const Dataset& d, const AssessOptions& options = {});

/// Deterministic report body. Timing lives in a separate object (efficiency_json) so reports
/// stay byte-identical across runs.
nlohmann::json to_json(const QualityReport& r);
nlohmann::json efficiency_json(const EfficiencyResult& e);

}  // namespace ea
