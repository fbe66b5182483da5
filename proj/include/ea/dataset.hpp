#pragma once

// Columnar tabular dataset with a JSON schema sidecar and a CSV reader/writer.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ea/decision_log.hpp"

namespace ea {

struct Column {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
  bool protected_attr = false;
  /// numeric and datetime (days since 1970-01-01) values; NaN marks a missing cell.
  std::vector<double> numbers;
  /// categorical values; "" marks a missing cell.
  std::vector<std::string> labels;

  bool is_numeric() const { return kind != FeatureKind::categorical; }
  bool missing(std::size_t row) const;
};

struct Dataset {
  std::string name;
  TaskKind task = TaskKind::classification;
  MetricKind metric_primary = MetricKind::accuracy;
  std::string target_name = "target";
  std::vector<Column> columns;
  /// Binary classification uses 0/1.
  std::vector<double> target;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;

  std::size_t n_rows() const { return target.size(); }
  const Column& column(std::string_view name) const;
  Column& column(std::string_view name);
  std::vector<std::string> protected_attrs() const;
};

/// Throws SchemaError on overlapping or out-of-range splits, ragged columns,
/// non-finite targets or non-binary classification targets.
void validate_dataset(const Dataset& d);

/// Seeded shuffle split; both index lists come back sorted ascending.
void assign_split(Dataset& d, double test_fraction, std::uint64_t seed);

struct DatasetSchema {
  std::string name;
  TaskKind task = TaskKind::classification;
  MetricKind metric_primary = MetricKind::accuracy;
  std::string target;
  /// Classification targets given as strings map this value to 1, everything else to 0.
  std::optional<std::string> positive_label;
  std::vector<FeatureSpec> features;
  double test_fraction = 0.2;
  std::uint64_t split_seed = 0;
  std::optional<std::vector<std::size_t>> train_indices;
  std::optional<std::vector<std::size_t>> test_indices;
};

DatasetSchema schema_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DatasetSchema& s);

/// Parses CSV text against a schema. Throws ParseError / SchemaError.
Dataset load_csv(std::string_view csv, const DatasetSchema& schema);
std::string write_csv(const Dataset& d);

/// Schema describing an in-memory dataset (explicit split indices).
DatasetSchema schema_of(const Dataset& d);

/// Manifest facts derived from a dataset, for logs that audit it.
RunManifest manifest_for(const Dataset& d, std::string run_id);

std::optional<double> parse_date_days(std::string_view text);
std::string format_date_days(double days);

/// Deterministic 64-bit digest of the dataset contents.
std::uint64_t dataset_hash(const Dataset& d);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

}  // namespace ea
