#pragma once

// Fault taxonomy, clean pipeline templates and seeded fault injection.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ea/decision_log.hpp"

namespace ea {

enum class FaultClass {
  leak_normalize_before_split,
  leak_encoder_on_test,
  temporal_shuffle,
  target_leakage,
  inappropriate_model,
  overfit_no_regularization,
  subtle_encoding,
};

enum class SeverityPrior { critical, major, borderline };

std::string_view to_string(FaultClass c);
std::string_view to_string(SeverityPrior s);
std::optional<FaultClass> parse_fault_class(std::string_view s);
std::span<const FaultClass> all_fault_classes();
SeverityPrior severity_prior(FaultClass c);
/// Leakage-type classes that must always be caught.
bool is_critical(FaultClass c);

struct InjectionPlan {
  std::string dataset_id;
  std::size_t n_clean = 10;
  std::size_t n_faulty = 15;
  /// Aggressive-but-legal clean decisions; counted inside n_clean.
  std::size_t n_decoys = 2;
  std::map<FaultClass, std::size_t> class_mix;
  std::uint64_t seed = 0;
};

struct Label {
  bool is_faulty = false;
  std::optional<FaultClass> fault;
  bool decoy = false;

  bool operator==(const Label&) const = default;
};

struct LabeledCorpus {
  RunManifest manifest;
  std::vector<DecisionRecord> records;
  std::map<std::string, Label> labels;
};

struct CorpusStats {
  std::size_t total = 0;
  std::size_t faulty = 0;
  std::map<FaultClass, std::size_t> per_class;
};

/// Canonical clean decision sequence for a dataset: split, impute, then a rotation of
/// leaf decisions hanging off the split or the imputer.
std::vector<DecisionRecord> clean_pipeline(const RunManifest& manifest, std::size_t n_records);

/// Replaces seeded leaf slots of `clean` with fault signatures and decoys.
/// Throws PlanError on inconsistent plans or classes the dataset cannot host.
LabeledCorpus inject(const RunManifest& manifest, std::span<const DecisionRecord> clean, const InjectionPlan& plan);

CorpusStats corpus_stats(const LabeledCorpus& corpus);

/// Builds the decision record carrying a fault's signature in the given slot.
DecisionRecord make_fault_record(FaultClass c, const DecisionRecord& slot, const RunManifest& manifest);
DecisionRecord make_decoy_record(const DecisionRecord& slot, std::size_t variant);

nlohmann::json labels_to_json(const LabeledCorpus& corpus);
std::map<std::string, Label> labels_from_json(const nlohmann::json& j);

/// Per-dataset fault mix of the 125-decision replica corpus.
std::map<FaultClass, std::size_t> replica_mix(std::string_view dataset_id);

}  // namespace ea
