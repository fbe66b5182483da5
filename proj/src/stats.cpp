#include "ea/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include "ea/errors.hpp"

namespace ea {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ArgError("normal quantile requires p in (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), p);
}

double normal_two_sided_p(double z) {
  return 2.0 * boost::math::cdf(boost::math::complement(boost::math::normal_distribution<double>(0.0, 1.0),
                                                        std::fabs(z)));
}

Interval wilson_interval(std::size_t successes, std::size_t n, double confidence) {
  if (n == 0) throw ArgError("wilson_interval requires n > 0");
  if (successes > n) throw ArgError("wilson_interval requires successes <= n");
  if (!(confidence > 0.0 && confidence < 1.0)) throw ArgError("confidence must lie in (0,1)");
  const double z = normal_quantile(0.5 + confidence / 2.0);
  const double nn = static_cast<double>(n);
  const double phat = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (phat + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / denom;
  Interval out{centre - half, centre + half};
  if (successes == 0) out.low = 0.0;
  if (successes == n) out.high = 1.0;
  out.low = std::clamp(out.low, 0.0, 1.0);
  out.high = std::clamp(out.high, 0.0, 1.0);
  return out;
}

ZTest two_proportion_z(double p_a, std::size_t n_a, double p_b, std::size_t n_b) {
  if (n_a == 0 || n_b == 0) throw ArgError("two_proportion_z requires n > 0");
  if (!(p_a >= 0.0 && p_a <= 1.0) || !(p_b >= 0.0 && p_b <= 1.0))
    throw ArgError("two_proportion_z requires proportions in [0,1]");
  const double na = static_cast<double>(n_a);
  const double nb = static_cast<double>(n_b);
  const double pooled = (p_a * na + p_b * nb) / (na + nb);
  const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb));
  if (se == 0.0) return {0.0, 1.0};
  const double z = (p_a - p_b) / se;
  return {z, normal_two_sided_p(z)};
}

double percentile_nearest_rank(std::span<const double> values, double q) {
  if (values.empty()) throw ArgError("percentile of an empty sample");
  if (!(q >= 0.0 && q <= 100.0)) throw ArgError("percentile rank must lie in [0,100]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

StatsSummary summarize(std::span<const double> values) {
  if (values.empty()) throw ArgError("summary of an empty sample");
  StatsSummary s;
  s.n = values.size();
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  s.pct_2_5 = percentile_nearest_rank(values, 2.5);
  s.pct_97_5 = percentile_nearest_rank(values, 97.5);
  return s;
}

nlohmann::json to_json(const StatsSummary& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"pct_2_5", s.pct_2_5}, {"pct_97_5", s.pct_97_5}, {"n", s.n}};
}

std::string format_p(double p) {
  if (p < 0.001) return "<0.001";
  return fmt::format("{:.3f}", p);
}

}  // namespace ea
