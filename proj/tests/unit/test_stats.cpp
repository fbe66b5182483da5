#include <doctest.h>

#include <cmath>
#include <vector>

#include "ea/errors.hpp"
#include "ea/stats.hpp"

using namespace ea;

namespace {

// Closed-form Wilson bounds with z = 1.959963984540054.
std::pair<double, double> wilson_oracle(double k, double n) {
  const double z = 1.959963984540054;
  const double p = k / n;
  const double denom = 1 + z * z / n;
  const double centre = (p + z * z / (2 * n)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom;
  return {centre - half, centre + half};
}

}  // namespace

TEST_CASE("wilson interval") {
  const auto ci = wilson_interval(45, 60);
  const auto [lo, hi] = wilson_oracle(45, 60);
  CHECK(ci.low == doctest::Approx(lo).epsilon(1e-9));
  CHECK(ci.high == doctest::Approx(hi).epsilon(1e-9));
  CHECK(std::round(ci.low * 1000) / 1000 == doctest::Approx(0.628));
  CHECK(std::round(ci.high * 1000) / 1000 == doctest::Approx(0.842));
  CHECK(wilson_interval(0, 12).low == 0.0);
  CHECK(wilson_interval(12, 12).high == doctest::Approx(1.0));
  CHECK_THROWS_AS(wilson_interval(5, 4), ArgError);
  CHECK_THROWS_AS(wilson_interval(0, 0), ArgError);
}

TEST_CASE("two proportion z-test") {
  // Pooled p = 62/120; se = sqrt(p(1-p)(2/60)).
  const double pool = 62.0 / 120.0;
  const double z = (45.0 / 60 - 17.0 / 60) / std::sqrt(pool * (1 - pool) * (2.0 / 60));
  const auto t = two_proportion_z(45.0 / 60, 60, 17.0 / 60, 60);
  CHECK(t.z == doctest::Approx(z).epsilon(1e-12));
  CHECK(t.p == doctest::Approx(std::erfc(z / std::sqrt(2.0))).epsilon(1e-9));
  CHECK(t.p < 0.001);
  CHECK(format_p(t.p) == "<0.001");

  const auto u = two_proportion_z(0.5, 60, 20.0 / 60, 60);
  CHECK(u.z == doctest::Approx(1.851640).epsilon(1e-6));
  CHECK(u.p == doctest::Approx(0.064078).epsilon(1e-5));
  CHECK(format_p(u.p) == "0.064");
  CHECK_THROWS_AS(two_proportion_z(1.2, 10, 0.5, 10), ArgError);
}

TEST_CASE("nearest-rank percentiles and summaries") {
  const std::vector<double> v{5, 1, 4, 2, 3};
  CHECK(percentile_nearest_rank(v, 0) == 1);
  CHECK(percentile_nearest_rank(v, 50) == 3);
  CHECK(percentile_nearest_rank(v, 100) == 5);
  CHECK_THROWS_AS(percentile_nearest_rank(std::vector<double>{}, 50), ArgError);
  const auto s = summarize(v);
  CHECK(s.mean == doctest::Approx(3.0));
  CHECK(s.std == doctest::Approx(std::sqrt(2.5)));
  CHECK(s.n == 5);
}

TEST_CASE("normal helpers") {
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(normal_two_sided_p(1.959963984540054) == doctest::Approx(0.05).epsilon(1e-9));
}
