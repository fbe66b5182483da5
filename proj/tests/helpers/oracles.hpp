#pragma once

// Brute-force metric oracles: each metric recomputed from its textbook definition with
// nested loops, independent of the library's implementation.

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace ea::testing {

struct OracleSample {
  std::vector<double> y, proba, pred, value, truth;
  std::vector<std::string> group;
};

inline OracleSample random_sample(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> g(0, 2);
  OracleSample s;
  for (std::size_t i = 0; i < n; ++i) {
    // Scores on a coarse grid so ties exercise the AUC tie rule.
    const double p = std::round(u(rng) * 20.0) / 20.0;
    s.proba.push_back(p);
    s.y.push_back(u(rng) < p ? 1.0 : 0.0);
    s.pred.push_back(p >= 0.5 ? 1.0 : 0.0);
    s.truth.push_back(10.0 * u(rng) - 3.0);
    s.value.push_back(s.truth.back() + u(rng) - 0.4);
    s.group.push_back(std::string(1, static_cast<char>('a' + g(rng))));
  }
  // Both classes and all groups present.
  s.y[0] = 1.0;
  s.y[1] = 0.0;
  s.group[0] = "a";
  s.group[1] = "b";
  s.group[2] = "c";
  return s;
}

inline bool close_rel(double a, double b, double rel = 1e-9) {
  return std::fabs(a - b) <= rel * std::max({1.0, std::fabs(a), std::fabs(b)});
}

inline double bf_accuracy(const OracleSample& s) {
  double hits = 0;
  for (std::size_t i = 0; i < s.y.size(); ++i) hits += s.y[i] == s.pred[i];
  return hits / static_cast<double>(s.y.size());
}

inline double bf_f1(const OracleSample& s) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < s.y.size(); ++i) {
    tp += s.y[i] == 1 && s.pred[i] == 1;
    fp += s.y[i] == 0 && s.pred[i] == 1;
    fn += s.y[i] == 1 && s.pred[i] == 0;
  }
  return tp == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
}

// Probability that a random positive outranks a random negative, ties counting one half.
inline double bf_auc(const OracleSample& s) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < s.y.size(); ++i) {
    for (std::size_t j = 0; j < s.y.size(); ++j) {
      if (s.y[i] != 1 || s.y[j] != 0) continue;
      pairs += 1;
      wins += s.proba[i] > s.proba[j] ? 1.0 : (s.proba[i] == s.proba[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

inline double bf_rmse(const OracleSample& s) {
  double acc = 0;
  for (std::size_t i = 0; i < s.truth.size(); ++i) acc += (s.truth[i] - s.value[i]) * (s.truth[i] - s.value[i]);
  return std::sqrt(acc / static_cast<double>(s.truth.size()));
}

inline double bf_mae(const OracleSample& s) {
  double acc = 0;
  for (std::size_t i = 0; i < s.truth.size(); ++i) acc += std::fabs(s.truth[i] - s.value[i]);
  return acc / static_cast<double>(s.truth.size());
}

inline double bf_r2(const OracleSample& s) {
  const double n = static_cast<double>(s.truth.size());
  double mean = 0;
  for (double v : s.truth) mean += v / n;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < s.truth.size(); ++i) {
    ss_res += (s.truth[i] - s.value[i]) * (s.truth[i] - s.value[i]);
    ss_tot += (s.truth[i] - mean) * (s.truth[i] - mean);
  }
  return 1.0 - ss_res / ss_tot;
}

// Ten equal-width confidence bins; each row's bin found by scanning bin edges.
inline double bf_ece(const OracleSample& s, int bins = 10) {
  double ece = 0;
  const double n = static_cast<double>(s.y.size());
  for (int b = 0; b < bins; ++b) {
    const double lo = static_cast<double>(b) / bins, hi = static_cast<double>(b + 1) / bins;
    double cnt = 0, conf = 0, hit = 0;
    for (std::size_t i = 0; i < s.y.size(); ++i) {
      const double c = s.proba[i] >= 0.5 ? s.proba[i] : 1.0 - s.proba[i];
      const bool in = (c >= lo && c < hi) || (b == bins - 1 && c == 1.0);
      if (!in) continue;
      cnt += 1;
      conf += c;
      hit += (s.proba[i] >= 0.5 ? 1.0 : 0.0) == s.y[i];
    }
    if (cnt > 0) ece += cnt / n * std::fabs(hit / cnt - conf / cnt);
  }
  return ece;
}

inline std::pair<double, double> bf_fairness(const OracleSample& s) {
  std::set<std::string> groups(s.group.begin(), s.group.end());
  auto rate = [&](const std::string& g, int y_filter) {
    double n = 0, pos = 0;
    for (std::size_t i = 0; i < s.y.size(); ++i) {
      if (s.group[i] != g) continue;
      if (y_filter >= 0 && s.y[i] != y_filter) continue;
      n += 1;
      pos += s.pred[i];
    }
    return std::make_pair(n, pos / std::max(n, 1.0));
  };
  double dp = 0, eo = 0;
  for (const auto& a : groups) {
    for (const auto& b : groups) {
      dp = std::max(dp, std::fabs(rate(a, -1).second - rate(b, -1).second));
      for (int y = 0; y <= 1; ++y) {
        auto ra = rate(a, y), rb = rate(b, y);
        if (ra.first > 0 && rb.first > 0) eo = std::max(eo, std::fabs(ra.second - rb.second));
      }
    }
  }
  return {dp, eo};
}


}  // namespace ea::testing
