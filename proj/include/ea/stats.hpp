#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>

#include <json.hpp>

namespace ea {

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Wilson score interval for a binomial proportion. Throws ArgError unless 0 <= successes <= n and n > 0.
Interval wilson_interval(std::size_t successes, std::size_t n, double confidence = 0.95);

struct ZTest {
  double z = 0.0;
  double p = 1.0;
};

/// Pooled two-proportion z-test, two-sided. Proportions outside [0,1] or n == 0 throw ArgError.
ZTest two_proportion_z(double p_a, std::size_t n_a, double p_b, std::size_t n_b);

/// Standard normal quantile and upper-tail helpers.
double normal_quantile(double p);
double normal_two_sided_p(double z);

/// Nearest-rank percentile (q in [0,100]) of unsorted values. Throws ArgError on empty input.
double percentile_nearest_rank(std::span<const double> values, double q);

struct StatsSummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n-1)
  double pct_2_5 = 0.0;
  double pct_97_5 = 0.0;
  std::size_t n = 0;
};

StatsSummary summarize(std::span<const double> values);
nlohmann::json to_json(const StatsSummary& s);

/// "<0.001" below that threshold, otherwise three decimals.
std::string format_p(double p);

}  // namespace ea
