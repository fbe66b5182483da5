#pragma once

// Task, fairness and calibration metrics over raw prediction vectors.

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ea {

/// Labels and predictions are 0/1.
double accuracy(std::span<const double> y, std::span<const double> pred);
/// F1 of the positive class; 0 when precision + recall is 0.
double f1_score(std::span<const double> y, std::span<const double> pred);
/// Mann-Whitney AUC with tie-averaged ranks; nullopt when only one class is present.
std::optional<double> auc(std::span<const double> y, std::span<const double> scores);

double rmse(std::span<const double> y, std::span<const double> pred);
double mae(std::span<const double> y, std::span<const double> pred);
/// 1 - SS_res/SS_tot; for a constant target: 1 if the fit is exact, else 0.
double r2_score(std::span<const double> y, std::span<const double> pred);

std::vector<double> threshold_labels(std::span<const double> proba, double threshold = 0.5);

struct FairnessResult {
  double dp = 0.0;
  double eo = 0.0;
  std::vector<std::string> warnings;
};

/// Max pairwise demographic-parity and equalized-odds gaps across groups.
/// Empty (group, y) cells are skipped with a warning. Throws SpecError with fewer than two groups.
FairnessResult fairness(std::span<const double> y, std::span<const double> pred, std::span<const std::string> groups);

struct ReliabilityBin {
  double confidence_mean = 0.0;
  double accuracy = 0.0;
  std::size_t count = 0;
};

struct CalibrationResult {
  double ece = 0.0;
  std::vector<ReliabilityBin> bins;
};

/// Equal-width bins over max-class confidence max(p, 1-p); empty bins contribute zero.
CalibrationResult calibration_error(std::span<const double> y, std::span<const double> proba, std::size_t n_bins = 10);

}  // namespace ea
