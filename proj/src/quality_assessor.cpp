#include "ea/quality_assessor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "ea/errors.hpp"
#include "ea/seeding.hpp"

namespace ea {

namespace {

std::vector<double> test_targets(const Dataset& d) {
  std::vector<double> y;
  y.reserve(d.test.size());
  for (std::size_t i : d.test) y.push_back(d.target[i]);
  return y;
}

std::string group_label(const Column& c, std::size_t row) {
  if (!c.is_numeric()) return c.labels[row].empty() ? "<missing>" : c.labels[row];
  return std::isnan(c.numbers[row]) ? "<missing>" : fmt::format("{}", c.numbers[row]);
}

bool is_feature_kind_numeric(const Column& c) { return c.kind == FeatureKind::numeric; }

struct TrainStats {
  double mean = 0.0;
  double sd = 0.0;
  std::string mode;
};

TrainStats train_stats(const Dataset& d, const Column& c) {
  TrainStats s;
  if (c.is_numeric()) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i : d.train) {
      if (!std::isnan(c.numbers[i])) {
        sum += c.numbers[i];
        ++n;
      }
    }
    if (n == 0) return s;
    s.mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i : d.train) {
      if (!std::isnan(c.numbers[i])) ss += (c.numbers[i] - s.mean) * (c.numbers[i] - s.mean);
    }
    s.sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  } else {
    std::map<std::string, std::size_t> counts;
    for (std::size_t i : d.train) {
      if (!c.labels[i].empty()) ++counts[c.labels[i]];
    }
    std::size_t best = 0;
    for (const auto& [k, n] : counts) {
      if (n > best) {
        best = n;
        s.mode = k;
      }
    }
  }
  return s;
}

double robustness_metric(const Dataset& d, std::span<const double> scores) {
  const auto y = test_targets(d);
  if (d.task == TaskKind::classification) return accuracy(y, threshold_labels(scores));
  return rmse(y, scores);
}

}  // namespace

TaskMetrics task_metrics(const Dataset& d, std::span<const double> scores) {
  const auto y = test_targets(d);
  if (scores.size() != y.size()) throw ArgError("score vector does not match the test split");
  TaskMetrics m;
  if (d.task == TaskKind::classification) {
    const auto labels = threshold_labels(scores);
    m.values["accuracy"] = accuracy(y, labels);
    m.values["f1"] = f1_score(y, labels);
    if (auto a = auc(y, scores)) {
      m.values["auc"] = *a;
    } else {
      m.warnings.push_back("auc_undefined_single_class");
    }
  } else {
    m.values["rmse"] = rmse(y, scores);
    m.values["mae"] = mae(y, scores);
    m.values["r2"] = r2_score(y, scores);
  }
  return m;
}

TaskMetrics task_metrics(const Predictor& p, const Dataset& d) { return task_metrics(d, p.predict(d, d.test)); }

FairnessResult fairness_metrics(const Predictor& p, const Dataset& d, const std::string& attr) {
  if (d.task != TaskKind::classification) throw SpecError("fairness metrics need a classification task");
  const Column* col = nullptr;
  for (const auto& c : d.columns) {
    if (c.name == attr) col = &c;
  }
  if (!col) throw SpecError("unknown protected attribute '" + attr + "'");
  std::vector<std::string> groups;
  for (std::size_t i : d.test) groups.push_back(group_label(*col, i));
  const auto y = test_targets(d);
  const auto pred = threshold_labels(p.predict(d, d.test));
  return fairness(y, pred, groups);
}

CalibrationResult calibration(const Predictor& p, const Dataset& d, std::size_t n_bins) {
  if (d.task != TaskKind::classification) throw SpecError("calibration needs a classification task");
  const auto y = test_targets(d);
  const auto scores = p.predict(d, d.test);
  return calibration_error(y, scores, n_bins);
}

std::string_view to_string(PerturbKind k) {
  return k == PerturbKind::gaussian_noise ? "gaussian_noise" : "missingness";
}

PerturbKind parse_perturb_kind(std::string_view s) {
  if (s == "gaussian_noise" || s == "noise") return PerturbKind::gaussian_noise;
  if (s == "missingness" || s == "missing") return PerturbKind::missingness;
  throw SpecError("unknown perturbation kind '" + std::string(s) + "'");
}

Dataset perturb(const Dataset& d, const PerturbationSpec& spec, std::size_t* removed_cells) {
  if (!(spec.level >= 0.0 && spec.level <= 1.0)) throw SpecError(fmt::format("perturbation level {} outside [0,1]", spec.level));
  for (const auto& name : spec.columns) {
    if (std::none_of(d.columns.begin(), d.columns.end(), [&](const Column& c) { return c.name == name; })) {
      throw SpecError("perturbation names unknown column '" + name + "'");
    }
  }
  Dataset out = d;
  std::size_t removed = 0;
  if (spec.kind == PerturbKind::gaussian_noise) {
    bool any = false;
    for (auto& c : out.columns) {
      if (!is_feature_kind_numeric(c)) continue;
      any = true;
      const double sigma = spec.level * train_stats(d, c).sd;
      std::mt19937_64 rng(derive_seed(spec.seed, "noise/" + c.name));
      std::normal_distribution<double> z(0.0, 1.0);
      for (std::size_t i : out.test) {
        const double draw = z(rng);
        if (!std::isnan(c.numbers[i])) c.numbers[i] += sigma * draw;
      }
    }
    if (!any) throw SpecError("gaussian noise needs at least one numeric feature");
  } else {
    for (auto& c : out.columns) {
      if (!spec.columns.empty() && std::find(spec.columns.begin(), spec.columns.end(), c.name) == spec.columns.end()) {
        continue;
      }
      const TrainStats s = train_stats(d, c);
      std::mt19937_64 rng(derive_seed(spec.seed, "missing/" + c.name));
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (std::size_t i : out.test) {
        if (u(rng) >= spec.level) continue;
        ++removed;
        if (c.is_numeric()) {
          c.numbers[i] = s.mean;
        } else {
          c.labels[i] = s.mode;
        }
      }
    }
  }
  if (removed_cells) *removed_cells = removed;
  return out;
}

std::vector<GridCell> default_grid() {
  return {{PerturbKind::gaussian_noise, 0.01}, {PerturbKind::gaussian_noise, 0.05}, {PerturbKind::gaussian_noise, 0.10},
          {PerturbKind::missingness, 0.10},    {PerturbKind::missingness, 0.20},    {PerturbKind::missingness, 0.30}};
}

double degradation_pct(TaskKind task, double base, double perturbed) {
  if (base == 0.0) return 0.0;
  return task == TaskKind::classification ? (base - perturbed) / base * 100.0 : (perturbed - base) / base * 100.0;
}

std::vector<RobustnessCell> robustness_suite(const Predictor& p, const Dataset& d, const std::vector<GridCell>& grid,
                                             std::uint64_t seed) {
  const double base = robustness_metric(d, p.predict(d, d.test));
  std::vector<RobustnessCell> out;
  for (const auto& g : grid) {
    const Dataset noisy = perturb(d, {g.kind, g.level, seed, {}});
    RobustnessCell cell{g.kind, g.level, base, robustness_metric(noisy, p.predict(noisy, noisy.test)), 0.0};
    cell.degradation_pct = degradation_pct(d.task, cell.base, cell.perturbed);
    out.push_back(cell);
  }
  return out;
}

EfficiencyResult efficiency(const Predictor& p, const Dataset& d, std::size_t repeats) {
  if (repeats == 0) throw ArgError("efficiency needs at least one repeat");
  if (d.test.empty()) throw ArgError("efficiency needs test rows");
  using clock = std::chrono::steady_clock;
  constexpr double min_batch_seconds = 1e-3;
  constexpr std::size_t max_replication = 1 << 12;

  EfficiencyResult r;
  r.repeats = repeats;
  std::vector<std::size_t> rows = d.test;
  auto time_once = [&] {
    const auto t0 = clock::now();
    const auto s = p.predict(d, rows);
    const auto t1 = clock::now();
    if (s.size() != rows.size()) throw ArgError("predictor returned the wrong number of scores");
    return std::chrono::duration<double>(t1 - t0).count();
  };
  time_once();
  std::size_t factor = 1;
  while (time_once() < min_batch_seconds && factor < max_replication) {
    factor *= 2;
    rows.clear();
    for (std::size_t k = 0; k < factor; ++k) rows.insert(rows.end(), d.test.begin(), d.test.end());
    r.amplified = true;
  }
  std::vector<double> times;
  for (std::size_t k = 0; k < repeats; ++k) times.push_back(time_once());
  std::sort(times.begin(), times.end());
  r.median_seconds = times.size() % 2 ? times[times.size() / 2]
                                      : (times[times.size() / 2 - 1] + times[times.size() / 2]) / 2.0;
  r.batch_rows = rows.size();
  r.throughput = static_cast<double>(rows.size()) / std::max(r.median_seconds, 1e-12);
  return r;
}

QualityReport assess_model(const Predictor& p, const Dataset& d, const AssessOptions& options) {
  QualityReport r;
  r.dataset = d.name;
  r.model = p.kind();
  r.task = d.task;
  const auto scores = p.predict(d, d.test);
  r.metrics = task_metrics(d, scores);
  if (options.robustness) r.robustness = robustness_suite(p, d, options.grid, options.seed);
  if (d.task == TaskKind::classification) {
    for (const auto& attr : d.protected_attrs()) {
      try {
        r.fairness[attr] = fairness_metrics(p, d, attr);
      } catch (const SpecError&) {
        r.metrics.warnings.push_back("fairness_skipped:" + attr);
      }
    }
    r.calibration = calibration_error(test_targets(d), scores, options.calibration_bins);
  }
  if (options.efficiency) r.efficiency = efficiency(p, d, options.efficiency_repeats);
  return r;
}

nlohmann::json efficiency_json(const EfficiencyResult& e) {
  nlohmann::json j;
  j["throughput_samples_per_s"] = e.throughput;
  j["median_seconds"] = e.median_seconds;
  j["batch_rows"] = e.batch_rows;
  j["repeats"] = e.repeats;
  j["tags"] = e.amplified ? nlohmann::json::array({"amplified"}) : nlohmann::json::array();
  return j;
}

nlohmann::json to_json(const QualityReport& r) {
  nlohmann::json j;
  j["dataset"] = r.dataset;
  j["model"] = r.model;
  j["task_kind"] = to_string(r.task);
  j["task"] = r.metrics.values;
  j["warnings"] = r.metrics.warnings;
  auto rob = nlohmann::json::array();
  for (const auto& c : r.robustness) {
    rob.push_back({{"kind", to_string(c.kind)},
                   {"level", c.level},
                   {"base", c.base},
                   {"perturbed", c.perturbed},
                   {"degradation_pct", c.degradation_pct}});
  }
  j["robustness"] = rob;
  auto fair = nlohmann::json::object();
  for (const auto& [attr, f] : r.fairness) fair[attr] = {{"DP", f.dp}, {"EO", f.eo}, {"warnings", f.warnings}};
  j["fairness"] = fair;
  if (r.calibration) {
    auto bins = nlohmann::json::array();
    for (const auto& b : r.calibration->bins) {
      bins.push_back({{"confidence_mean", b.confidence_mean}, {"accuracy", b.accuracy}, {"count", b.count}});
    }
    j["calibration"] = {{"ece", r.calibration->ece}, {"reliability_bins", bins}};
  }
  return j;
}

}  // namespace ea
