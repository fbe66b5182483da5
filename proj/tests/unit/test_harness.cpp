#include <doctest.h>

#include <regex>
#include <set>

#include "ea/errors.hpp"
#include "ea/harness.hpp"
#include "ea/report.hpp"

using namespace ea;
using nlohmann::json;

namespace {

HarnessConfig test_config() {
  HarnessConfig cfg;
  cfg.data_dir = EA_TEST_DATA_DIR;
  return cfg;
}

void collect_numbers(const json& j, std::set<std::string>& out) {
  if (j.is_number()) {
    out.insert(j.dump());
  } else if (j.is_structured()) {
    for (const auto& v : j) collect_numbers(v, out);
  }
}

}  // namespace

TEST_CASE("reference overhead ratios") {
  const auto r = reference_ratios(91.85);
  CHECK(r.at("300") == doctest::Approx(91.85 / 300000.0 * 100).epsilon(1e-12));
  CHECK(r.at("600") == doctest::Approx(91.85 / 600000.0 * 100).epsilon(1e-12));
  CHECK(r.at("3600") == doctest::Approx(91.85 / 3600000.0 * 100).epsilon(1e-12));
  CHECK(std::fabs(r.at("300") - 0.031) <= 0.001);
  CHECK(std::fabs(r.at("600") - 0.015) <= 0.001);
  CHECK(std::fabs(r.at("3600") - 0.003) <= 0.001);
}

TEST_CASE("overhead shares sum to 100") {
  const auto rep = make_overhead_report({{"a", 1.0, 0, false}, {"b", 3.0, 0, false}, {"c", 0.25, 0, true}});
  double total = 0;
  for (const auto& c : rep.components) total += c.share_pct;
  CHECK(total == doctest::Approx(100.0));
  CHECK(rep.total_ms == doctest::Approx(4.25));
  CHECK(rep.components[1].share_pct == doctest::Approx(300.0 / 4.25));
}

TEST_CASE("config overrides") {
  const auto cfg = apply_overrides(test_config(), json{{"tau", 55.0}, {"sigma_d", 0.0}, {"n_seeds", 3}});
  CHECK(cfg.assessor.risk_threshold == 55.0);
  CHECK(cfg.assessor.noise_sigma == 0.0);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{0, 1, 2});
  CHECK_THROWS_AS(apply_overrides(test_config(), json{{"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(apply_overrides(test_config(), json{{"preset", "huge"}}), ConfigError);
}

TEST_CASE("presets gate experiments") {
  CHECK(preset_allows(Preset::minimal, 1));
  CHECK_FALSE(preset_allows(Preset::minimal, 2));
  CHECK(preset_allows(Preset::standard, 3));
  CHECK_FALSE(preset_allows(Preset::standard, 4));
  CHECK(preset_allows(Preset::full, 4));
  auto cfg = test_config();
  cfg.preset = Preset::minimal;
  CHECK_THROWS_AS(run_experiment({4, {}, {}, json::object()}, cfg), ConfigError);
  CHECK_THROWS_AS(run_experiment({7, {}, {}, json::object()}, test_config()), ConfigError);
  CHECK_THROWS_AS(load_fixture(EA_TEST_DATA_DIR, "mnist"), ConfigError);
}

TEST_CASE("experiment documents are reproducible and markdown copies json numbers") {
  for (int id = 1; id <= 4; ++id) {
    CAPTURE(id);
    ExperimentSpec spec;
    spec.id = id;
    const json a = run_experiment(spec, test_config());
    const json b = run_experiment(spec, test_config());
    CHECK(a.dump() == b.dump());
    CHECK(bands_pass(a));

    std::set<std::string> numbers;
    collect_numbers(a, numbers);
    const std::string md = to_markdown(a);
    const std::regex num(R"((^|[\s|(\[,])(-?\d+(?:\.\d+)?(?:e-?\d+)?)(?=[\s|)\],%]|$))");
    for (auto it = std::sregex_iterator(md.begin(), md.end(), num); it != std::sregex_iterator(); ++it) {
      const std::string tok = (*it)[2];
      CAPTURE(tok);
      CHECK(numbers.count(tok) == 1);
    }
  }
}

TEST_CASE("multi-seed detection is independent of thread count") {
  std::vector<Fixture> fx;
  for (const auto& n : default_datasets()) fx.push_back(load_fixture(EA_TEST_DATA_DIR, n));
  const auto corpora = build_corpora(fx, 0);
  const std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7};
  const auto a = detection_multi_seed(corpora, {}, seeds, 1);
  const auto b = detection_multi_seed(corpora, {}, seeds, 4);
  CHECK(a == b);
  CHECK(a.at("f1").size() == seeds.size());
  CHECK(fraction_at_least({0.5, 0.9, 0.95, 1.0}, 0.919) == 0.5);
}

TEST_CASE("report formats") {
  CHECK(parse_report_format("md") == ReportFormat::markdown);
  CHECK(parse_report_format("json") == ReportFormat::json);
  const json doc{{"experiment", "exp9"}};
  CHECK_THROWS_AS(to_markdown(doc), ReportError);
  CHECK(emit_report(json{{"a", 1}}, ReportFormat::json) == "{\n  \"a\": 1\n}\n");
}

TEST_CASE("bench covers the enabled components") {
  auto cfg = test_config();
  const Fixture fx = load_fixture(EA_TEST_DATA_DIR, "titanic");
  cfg.preset = Preset::standard;
  const auto rep = bench_overhead(fx, cfg, 2, 1, true, "logistic");
  REQUIRE(rep.components.size() == 3);
  CHECK(rep.components[2].name == "quality_assessor");
  for (const auto& c : rep.components) CHECK(c.median_ms > 0.0);
  const json j = to_json(rep);
  CHECK(j.at("reference_ratios_pct").size() == 3);
}
