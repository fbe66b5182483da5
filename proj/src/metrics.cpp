#include "ea/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>

#include "ea/errors.hpp"

namespace ea {

namespace {

void same_length(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgError("metric inputs differ in length");
  if (a.empty()) throw ArgError("metric of an empty sample");
}

}  // namespace

double accuracy(std::span<const double> y, std::span<const double> pred) {
  same_length(y, pred);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < y.size(); ++i) hit += y[i] == pred[i];
  return static_cast<double>(hit) / static_cast<double>(y.size());
}

double f1_score(std::span<const double> y, std::span<const double> pred) {
  same_length(y, pred);
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (pred[i] == 1.0 && y[i] == 1.0) ++tp;
    if (pred[i] == 1.0 && y[i] != 1.0) ++fp;
    if (pred[i] != 1.0 && y[i] == 1.0) ++fn;
  }
  const double denom = 2 * tp + fp + fn;
  return denom > 0 ? 2 * tp / denom : 0.0;
}

std::optional<double> auc(std::span<const double> y, std::span<const double> scores) {
  same_length(y, scores);
  const std::size_t n = y.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }
  double n_pos = 0, rank_sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] == 1.0) {
      ++n_pos;
      rank_sum += rank[i];
    }
  }
  const double n_neg = static_cast<double>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg);
}

double rmse(std::span<const double> y, std::span<const double> pred) {
  same_length(y, pred);
  double ss = 0;
  for (std::size_t i = 0; i < y.size(); ++i) ss += (y[i] - pred[i]) * (y[i] - pred[i]);
  return std::sqrt(ss / static_cast<double>(y.size()));
}

double mae(std::span<const double> y, std::span<const double> pred) {
  same_length(y, pred);
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) s += std::fabs(y[i] - pred[i]);
  return s / static_cast<double>(y.size());
}

double r2_score(std::span<const double> y, std::span<const double> pred) {
  same_length(y, pred);
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - pred[i]) * (y[i] - pred[i]);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

std::vector<double> threshold_labels(std::span<const double> proba, double threshold) {
  std::vector<double> out(proba.size());
  for (std::size_t i = 0; i < proba.size(); ++i) out[i] = proba[i] >= threshold ? 1.0 : 0.0;
  return out;
}

FairnessResult fairness(std::span<const double> y, std::span<const double> pred, std::span<const std::string> groups) {
  same_length(y, pred);
  if (groups.size() != y.size()) throw ArgError("group vector differs in length");
  struct Cell {
    double n = 0, pos = 0;
  };
  // per group: overall, y=0, y=1
  std::map<std::string, std::array<Cell, 3>> cells;
  for (std::size_t i = 0; i < y.size(); ++i) {
    auto& g = cells[groups[i]];
    const double p = pred[i] == 1.0 ? 1.0 : 0.0;
    g[0].n += 1;
    g[0].pos += p;
    auto& c = g[y[i] == 1.0 ? 2 : 1];
    c.n += 1;
    c.pos += p;
  }
  if (cells.size() < 2) throw SpecError("fairness needs at least two groups in the evaluated rows");

  FairnessResult out;
  for (auto a = cells.begin(); a != cells.end(); ++a) {
    for (auto b = std::next(a); b != cells.end(); ++b) {
      out.dp = std::max(out.dp, std::fabs(a->second[0].pos / a->second[0].n - b->second[0].pos / b->second[0].n));
      for (int k = 1; k <= 2; ++k) {
        const Cell& ca = a->second[k];
        const Cell& cb = b->second[k];
        if (ca.n == 0 || cb.n == 0) {
          out.warnings.push_back("empty cell for groups " + a->first + "/" + b->first + " at y=" +
                                 std::to_string(k - 1) + "; comparison skipped");
          continue;
        }
        out.eo = std::max(out.eo, std::fabs(ca.pos / ca.n - cb.pos / cb.n));
      }
    }
  }
  return out;
}

CalibrationResult calibration_error(std::span<const double> y, std::span<const double> proba, std::size_t n_bins) {
  same_length(y, proba);
  if (n_bins == 0) throw ArgError("calibration needs at least one bin");
  // Confidences are summed in sorted order so the result does not depend on row order.
  std::vector<std::vector<double>> confs(n_bins);
  std::vector<double> hit_sum(n_bins, 0.0);
  std::vector<std::size_t> count(n_bins, 0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p = std::clamp(proba[i], 0.0, 1.0);
    const double conf = std::max(p, 1.0 - p);
    const double label = p >= 0.5 ? 1.0 : 0.0;
    auto b = static_cast<std::size_t>(conf * static_cast<double>(n_bins));
    b = std::min(b, n_bins - 1);
    confs[b].push_back(conf);
    hit_sum[b] += label == y[i] ? 1.0 : 0.0;
    ++count[b];
  }
  CalibrationResult out;
  const double n = static_cast<double>(y.size());
  for (std::size_t b = 0; b < n_bins; ++b) {
    ReliabilityBin bin;
    bin.count = count[b];
    if (count[b] > 0) {
      std::sort(confs[b].begin(), confs[b].end());
      const double conf_sum = std::accumulate(confs[b].begin(), confs[b].end(), 0.0);
      bin.confidence_mean = conf_sum / static_cast<double>(count[b]);
      bin.accuracy = hit_sum[b] / static_cast<double>(count[b]);
      out.ece += static_cast<double>(count[b]) / n * std::fabs(bin.accuracy - bin.confidence_mean);
    }
    out.bins.push_back(bin);
  }
  return out;
}

}  // namespace ea
