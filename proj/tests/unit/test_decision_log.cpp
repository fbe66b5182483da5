#include <doctest.h>

#include <json.hpp>

#include "ea/decision_log.hpp"
#include "ea/errors.hpp"
#include "toy_data.hpp"

using namespace ea;
using nlohmann::json;

namespace {

json small_log_json() {
  const RunLog log = testing::clean_log(testing::mixed_classification(), 12);
  return to_json(log);
}

}  // namespace

TEST_CASE("run log round-trips through JSON") {
  const RunLog log = testing::clean_log(testing::mixed_classification(), 25);
  const std::string text = serialize_run_log(log);
  const RunLog back = parse_run_log(text);
  CHECK(back == log);
  CHECK(serialize_run_log(back) == text);
}

TEST_CASE("malformed JSON reports the byte offset") {
  const std::string text = R"({"manifest": {"run_id": "r"}, "decisions": [)";
  try {
    (void)parse_run_log(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.byte_offset() > 0);
    CHECK(e.byte_offset() <= text.size() + 1);
  }
}

TEST_CASE("schema violations name the field") {
  json j = small_log_json();
  j["decisions"][0].erase("action");
  CHECK_THROWS_AS(parse_run_log(j.dump()), SchemaError);

  j = small_log_json();
  j["decisions"][1]["stage"] = "deployment";
  try {
    (void)parse_run_log(j.dump());
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.field().find("stage") != std::string::npos);
  }

  j = small_log_json();
  j["decisions"][2]["action"] = "summon_oracle";
  CHECK_NOTHROW(parse_run_log(j.dump()));
  ParseOptions strict;
  strict.strict_actions = true;
  CHECK_THROWS_AS(parse_run_log(j.dump(), strict), SchemaError);
}

TEST_CASE("provenance errors") {
  json j = small_log_json();
  j["decisions"][3]["parents"] = json::array({"nope"});
  CHECK_THROWS_AS(parse_run_log(j.dump()), GraphError);

  j = small_log_json();
  j["decisions"][2]["decision_id"] = j["decisions"][1]["decision_id"];
  CHECK_THROWS_AS(parse_run_log(j.dump()), GraphError);

  // d01 <- d02 <- d01 closes a loop.
  j = small_log_json();
  j["decisions"][0]["parents"] = json::array({j["decisions"][1]["decision_id"]});
  try {
    (void)parse_run_log(j.dump());
    FAIL("expected GraphError");
  } catch (const GraphError& e) {
    CHECK_FALSE(e.cycle().empty());
  }
}

TEST_CASE("lineage walks ancestors in topological order") {
  const RunLog log = parse_run_log(small_log_json().dump());
  const auto g = build_provenance(log.decisions);
  CHECK(g.nodes().size() == log.decisions.size());
  const std::string last = log.decisions.back().decision_id;
  const auto lineage = trace_lineage(g, last);
  REQUIRE_FALSE(lineage.empty());
  CHECK(lineage.back() == last);
  for (std::size_t i = 1; i < lineage.size(); ++i) CHECK(g.position(lineage[i - 1]) < g.position(lineage[i]));
  for (const auto& e : g.edges()) CHECK(g.position(e.first) < g.position(e.second));
  CHECK_THROWS_AS(trace_lineage(g, "missing"), NotFound);
}

TEST_CASE("records come back ordered by timestamp") {
  json j = small_log_json();
  std::swap(j["decisions"][0], j["decisions"][5]);
  const RunLog log = parse_run_log(j.dump());
  for (std::size_t i = 1; i < log.decisions.size(); ++i) {
    CHECK(log.decisions[i - 1].timestamp <= log.decisions[i].timestamp);
  }
}
