#include <doctest.h>

#include "ea/decision_assessor.hpp"
#include "ea/errors.hpp"
#include "ea/harness.hpp"

using namespace ea;

namespace {

std::vector<LabeledCorpus> fixture_corpora() {
  std::vector<Fixture> fixtures;
  for (const auto& name : default_datasets()) fixtures.push_back(load_fixture(EA_TEST_DATA_DIR, name));
  return build_corpora(fixtures, 0);
}

}  // namespace

TEST_CASE("detection arithmetic from published counts") {
  const auto r = detection_report(68, 5, 7, 45);
  const double p = 68.0 / 73.0, rc = 68.0 / 75.0;
  CHECK(r.precision == doctest::Approx(p).epsilon(1e-12));
  CHECK(r.recall == doctest::Approx(rc).epsilon(1e-12));
  CHECK(r.f1 == doctest::Approx(2 * p * rc / (p + rc)).epsilon(1e-12));
  CHECK(r.precision == doctest::Approx(0.932).epsilon(0.001));
  CHECK(r.recall == doctest::Approx(0.907).epsilon(0.001));
  CHECK(r.f1 == doctest::Approx(0.919).epsilon(0.001));
  CHECK(r.total() == 125);

  const auto empty = detection_report(0, 0, 3, 4);
  CHECK(empty.precision == 0.0);
  CHECK(empty.f1 == 0.0);
}

TEST_CASE("pooled reports sum counts") {
  const std::vector<DetectionReport> parts{detection_report(10, 1, 2, 12), detection_report(5, 0, 3, 4)};
  const auto pooled = pool_reports(parts);
  CHECK(pooled.tp == 15);
  CHECK(pooled.fn == 5);
  CHECK(pooled.f1 == doctest::Approx(detection_report(15, 1, 5, 16).f1));
}

TEST_CASE("configuration bounds") {
  AssessorConfig cfg;
  cfg.risk_threshold = 0;
  CHECK_THROWS_AS(check_config(cfg), ConfigError);
  cfg.risk_threshold = 100;
  CHECK_THROWS_AS(check_config(cfg), ConfigError);
  cfg.risk_threshold = 60;
  cfg.noise_sigma = -1;
  CHECK_THROWS_AS(check_config(cfg), ConfigError);
}

TEST_CASE("noise-free audit of the replica corpus") {
  const auto corpora = fixture_corpora();
  AssessorConfig cfg;
  cfg.noise_sigma = 0.0;
  const DetectionRun run = run_detection(corpora, cfg);
  CHECK(run.overall.total() == 125);
  CHECK(run.overall.tp + run.overall.fn == 75);
  for (std::size_t k = 0; k < corpora.size(); ++k) {
    const auto& corpus = corpora[k];
    const auto& findings = run.per_dataset[k].second.findings;
    for (const auto& f : findings) {
      const Label& truth = corpus.labels.at(f.decision_id);
      if (truth.is_faulty && is_critical(*truth.fault)) {
        CHECK(f.flagged);
        CHECK(f.predicted_class == truth.fault);
      }
      if (truth.is_faulty && !f.flagged) CHECK(*truth.fault == FaultClass::subtle_encoding);
      if (!truth.is_faulty) CHECK_FALSE(f.flagged);
    }
  }
}

TEST_CASE("scoring noise is seeded") {
  const auto corpora = fixture_corpora();
  AssessorConfig cfg;
  cfg.seed = 3;
  const auto a = audit_corpus(corpora[0], cfg);
  const auto b = audit_corpus(corpora[0], cfg);
  CHECK(a.findings == b.findings);
  cfg.seed = 4;
  const auto c = audit_corpus(corpora[0], cfg);
  CHECK(a.findings != c.findings);
}

TEST_CASE("rubric scores stay in range") {
  const auto corpora = fixture_corpora();
  AssessorConfig cfg;
  cfg.noise_sigma = 40.0;
  for (const auto& f : audit_corpus(corpora[1], cfg).findings) {
    for (double v : {f.scores.appropriateness, f.scores.consistency, f.scores.completeness, f.scores.efficiency,
                     f.scores.risk}) {
      CHECK(v >= 0.0);
      CHECK(v <= 100.0);
    }
    CHECK(f.flagged == (f.scores.risk < cfg.risk_threshold));
  }
}
