#include <doctest.h>

#include <set>

#include "ea/errors.hpp"
#include "ea/fault_catalog.hpp"
#include "toy_data.hpp"

using namespace ea;

namespace {

LabeledCorpus replica_corpus(const RunLog& log, std::uint64_t seed) {
  InjectionPlan plan;
  plan.dataset_id = log.manifest.dataset_id;
  plan.class_mix = replica_mix("german_credit");
  plan.seed = seed;
  return inject(log.manifest, log.decisions, plan);
}

}  // namespace

TEST_CASE("replica mixes add up to 75 faults over five datasets") {
  std::size_t total = 0;
  std::map<FaultClass, std::size_t> by_class;
  for (const char* name : {"german_credit", "adult_income", "titanic", "diabetes", "ca_housing"}) {
    std::size_t n = 0;
    for (const auto& [c, k] : replica_mix(name)) {
      n += k;
      by_class[c] += k;
    }
    CHECK(n == 15);
    total += n;
  }
  CHECK(total == 75);
  CHECK(by_class[FaultClass::subtle_encoding] == 7);
  CHECK_THROWS_AS(replica_mix("mnist"), NotFound);
}

TEST_CASE("injection follows the plan and keeps labels out of the records") {
  const RunLog log = testing::clean_log(testing::mixed_classification(), 25);
  const LabeledCorpus corpus = replica_corpus(log, 4);
  const CorpusStats stats = corpus_stats(corpus);
  CHECK(stats.total == 25);
  CHECK(stats.faulty == 15);
  CHECK(stats.per_class == replica_mix("german_credit"));
  std::size_t decoys = 0;
  for (const auto& [id, label] : corpus.labels) {
    decoys += label.decoy;
    CHECK(label.is_faulty == label.fault.has_value());
  }
  CHECK(decoys == 2);
  // The serialized log carries no ground truth.
  const std::string text = serialize_run_log(RunLog{corpus.manifest, corpus.records});
  for (auto c : all_fault_classes()) CHECK(text.find(std::string(to_string(c))) == std::string::npos);
  CHECK(text.find("decoy") == std::string::npos);
}

TEST_CASE("injection is deterministic per seed") {
  const RunLog log = testing::clean_log(testing::mixed_classification(), 25);
  const LabeledCorpus a = replica_corpus(log, 9);
  const LabeledCorpus b = replica_corpus(log, 9);
  CHECK(serialize_run_log(RunLog{a.manifest, a.records}) == serialize_run_log(RunLog{b.manifest, b.records}));
  CHECK(labels_to_json(a) == labels_to_json(b));
  const LabeledCorpus c = replica_corpus(log, 10);
  CHECK(labels_to_json(a) != labels_to_json(c));
}

TEST_CASE("labels round-trip") {
  const RunLog log = testing::clean_log(testing::mixed_classification(), 25);
  const LabeledCorpus corpus = replica_corpus(log, 1);
  const auto back = labels_from_json(labels_to_json(corpus));
  REQUIRE(back.size() == corpus.labels.size());
  for (const auto& [id, label] : corpus.labels) {
    CHECK(back.at(id).is_faulty == label.is_faulty);
    CHECK(back.at(id).fault == label.fault);
    CHECK(back.at(id).decoy == label.decoy);
  }
}

TEST_CASE("impossible plans are rejected") {
  const RunLog log = testing::clean_log(testing::mixed_classification(), 25);
  InjectionPlan plan;
  plan.dataset_id = log.manifest.dataset_id;
  plan.n_faulty = 30;
  CHECK_THROWS_AS(inject(log.manifest, log.decisions, plan), PlanError);

  // The toy dataset has no datetime column, so temporal faults have nowhere to live.
  plan.n_faulty = 2;
  plan.class_mix = {{FaultClass::temporal_shuffle, 2}};
  CHECK_THROWS_AS(inject(log.manifest, log.decisions, plan), PlanError);
}

TEST_CASE("fault class names round-trip and critical classes are the leakage ones") {
  std::set<FaultClass> critical;
  for (auto c : all_fault_classes()) {
    CHECK(parse_fault_class(to_string(c)) == c);
    if (is_critical(c)) critical.insert(c);
  }
  CHECK(critical == std::set<FaultClass>{FaultClass::leak_normalize_before_split, FaultClass::leak_encoder_on_test,
                                         FaultClass::temporal_shuffle, FaultClass::target_leakage});
}
