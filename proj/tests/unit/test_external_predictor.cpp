#include <doctest.h>

#include <cmath>

#include "ea/errors.hpp"
#include "ea/external_predictor.hpp"
#include "ea/quality_assessor.hpp"
#include "toy_data.hpp"

using namespace ea;

TEST_CASE("external model answers over line-delimited JSON") {
  Dataset d = testing::mixed_classification();
  d.column("a").numbers[d.test[0]] = std::nan("");
  ExternalPredictor p({EA_FAKE_MODEL, "sigmoid"}, TaskKind::classification);
  const auto scores = p.predict(d, d.test);
  REQUIRE(scores.size() == d.test.size());
  CHECK(scores[0] == 0.5);
  for (std::size_t i = 1; i < scores.size(); ++i) {
    CHECK(scores[i] == doctest::Approx(1.0 / (1.0 + std::exp(-d.column("a").numbers[d.test[i]]))));
  }
  // The child stays up between requests.
  CHECK(p.predict(d, d.test) == scores);

  AssessOptions opt;
  opt.efficiency = false;
  const auto q = assess_model(p, d, opt);
  CHECK(q.model == "external");
  CHECK(q.metrics.values.count("accuracy") == 1);
}

TEST_CASE("request framing") {
  const Dataset d = testing::mixed_classification();
  const std::vector<std::size_t> rows{d.test[0]};
  const auto req = nlohmann::json::parse(external_request(d, rows));
  REQUIRE(req.at("rows").size() == 1);
  CHECK(req["rows"][0].at("c").get<std::string>() == d.column("c").labels[rows[0]]);
  CHECK(external_request(d, rows).find('\n') == std::string::npos);
}

TEST_CASE("misbehaving external models") {
  const Dataset d = testing::mixed_classification();
  {
    ExternalPredictor p({EA_FAKE_MODEL, "short"}, TaskKind::classification);
    CHECK_THROWS_AS(p.predict(d, d.test), ParseError);
  }
  {
    ExternalPredictor p({EA_FAKE_MODEL, "range"}, TaskKind::classification);
    CHECK_THROWS_AS(p.predict(d, d.test), ParseError);
  }
  {
    ExternalPredictor p({EA_FAKE_MODEL, "range"}, TaskKind::regression);
    CHECK(p.predict(d, d.test).front() == 1.5);
  }
  {
    ExternalPredictor p({EA_FAKE_MODEL, "quit"}, TaskKind::classification);
    CHECK_THROWS_AS(p.predict(d, d.test), FitError);
  }
}
