#include "ea/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "ea/seeding.hpp"

namespace ea {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_missing_token(std::string_view s) { return s.empty() || s == "NA" || s == "?" || s == "nan" || s == "NaN"; }

std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// Splits CSV text into records of fields; honours double-quoted fields.
std::vector<std::pair<std::size_t, std::vector<std::string>>> split_csv(std::string_view text) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool any = false;
  std::size_t row_start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      quoted = true;
      any = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (any || !field.empty()) {
        fields.push_back(std::move(field));
        rows.emplace_back(row_start, std::move(fields));
      }
      fields.clear();
      field.clear();
      any = false;
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row_start = i + 1;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw ParseError(row_start, "unterminated quoted field");
  if (any || !field.empty()) {
    fields.push_back(std::move(field));
    rows.emplace_back(row_start, std::move(fields));
  }
  return rows;
}

std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::size_t> index_list(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array()) throw SchemaError(field, "expected an array of row indices");
  std::vector<std::size_t> out;
  for (const auto& v : j) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw SchemaError(field, "expected non-negative integers");
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

}  // namespace

bool Column::missing(std::size_t row) const {
  return is_numeric() ? std::isnan(numbers[row]) : labels[row].empty();
}

const Column& Dataset::column(std::string_view name) const {
  for (const auto& c : columns) {
    if (c.name == name) return c;
  }
  throw NotFound("dataset '" + this->name + "' has no column '" + std::string(name) + "'");
}

Column& Dataset::column(std::string_view name) {
  return const_cast<Column&>(static_cast<const Dataset&>(*this).column(name));
}

std::vector<std::string> Dataset::protected_attrs() const {
  std::vector<std::string> out;
  for (const auto& c : columns) {
    if (c.protected_attr) out.push_back(c.name);
  }
  return out;
}

void validate_dataset(const Dataset& d) {
  const std::size_t n = d.n_rows();
  for (const auto& c : d.columns) {
    const std::size_t len = c.is_numeric() ? c.numbers.size() : c.labels.size();
    if (len != n) throw SchemaError("columns." + c.name, "column length differs from target length");
    if (c.protected_attr && d.task != TaskKind::classification)
      throw SchemaError("columns." + c.name, "protected attributes are only evaluated on classification data");
  }
  for (double y : d.target) {
    if (!std::isfinite(y)) throw SchemaError("target", "target values must be finite");
    if (d.task == TaskKind::classification && y != 0.0 && y != 1.0)
      throw SchemaError("target", "classification targets must be 0 or 1");
  }
  std::vector<char> seen(n, 0);
  for (std::size_t i : d.train) {
    if (i >= n) throw SchemaError("split.train", "index out of range");
    if (seen[i]) throw SchemaError("split.train", "duplicate index");
    seen[i] = 1;
  }
  for (std::size_t i : d.test) {
    if (i >= n) throw SchemaError("split.test", "index out of range");
    if (seen[i]) throw SchemaError("split.test", "index overlaps train or repeats");
    seen[i] = 2;
  }
}

void assign_split(Dataset& d, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw SpecError("test_fraction must lie in (0,1)");
  std::vector<std::size_t> idx(d.n_rows());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, "split/" + d.name));
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(idx[i - 1], idx[pick(rng)]);
  }
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(idx.size())));
  d.test.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
  d.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  std::sort(d.train.begin(), d.train.end());
  std::sort(d.test.begin(), d.test.end());
}

DatasetSchema schema_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("schema", "expected an object");
  try {
    DatasetSchema s;
    s.name = j.at("name").get<std::string>();
    auto task = parse_task_kind(j.at("task_kind").get<std::string>());
    if (!task) throw SchemaError("schema.task_kind", "unknown task kind");
    s.task = *task;
    if (j.contains("metric_primary")) {
      auto m = parse_metric_kind(j["metric_primary"].get<std::string>());
      if (!m) throw SchemaError("schema.metric_primary", "unknown metric");
      s.metric_primary = *m;
    } else {
      s.metric_primary = s.task == TaskKind::classification ? MetricKind::accuracy : MetricKind::rmse;
    }
    s.target = j.at("target").get<std::string>();
    if (j.contains("positive_label") && !j["positive_label"].is_null())
      s.positive_label = j["positive_label"].get<std::string>();
    for (const auto& f : j.at("features")) {
      FeatureSpec spec;
      spec.name = f.at("name").get<std::string>();
      auto kind = parse_feature_kind(f.at("kind").get<std::string>());
      if (!kind) throw SchemaError("schema.features." + spec.name, "unknown feature kind");
      spec.kind = *kind;
      spec.protected_attr = f.value("protected", false);
      s.features.push_back(std::move(spec));
    }
    if (j.contains("split")) {
      const auto& sp = j["split"];
      s.test_fraction = sp.value("test_fraction", 0.2);
      s.split_seed = sp.value("seed", std::uint64_t{0});
      if (sp.contains("train")) s.train_indices = index_list(sp["train"], "schema.split.train");
      if (sp.contains("test")) s.test_indices = index_list(sp["test"], "schema.split.test");
      if (s.train_indices.has_value() != s.test_indices.has_value())
        throw SchemaError("schema.split", "explicit splits need both train and test indices");
    }
    return s;
  } catch (const Error&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("schema", e.what());
  }
}

nlohmann::json to_json(const DatasetSchema& s) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& f : s.features)
    features.push_back({{"name", f.name}, {"kind", to_string(f.kind)}, {"protected", f.protected_attr}});
  nlohmann::json split{{"test_fraction", s.test_fraction}, {"seed", s.split_seed}};
  if (s.train_indices) split["train"] = *s.train_indices;
  if (s.test_indices) split["test"] = *s.test_indices;
  nlohmann::json j{{"name", s.name},
                   {"task_kind", to_string(s.task)},
                   {"metric_primary", to_string(s.metric_primary)},
                   {"target", s.target},
                   {"features", std::move(features)},
                   {"split", std::move(split)}};
  if (s.positive_label) j["positive_label"] = *s.positive_label;
  return j;
}

Dataset load_csv(std::string_view csv, const DatasetSchema& schema) {
  auto rows = split_csv(csv);
  if (rows.empty()) throw ParseError(0, "empty CSV input");
  const auto& header = rows.front().second;
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < header.size(); ++i) pos.emplace(header[i], i);

  auto locate = [&](const std::string& name) {
    auto it = pos.find(name);
    if (it == pos.end()) throw SchemaError("csv.header", "column '" + name + "' not found");
    return it->second;
  };

  Dataset d;
  d.name = schema.name;
  d.task = schema.task;
  d.metric_primary = schema.metric_primary;
  d.target_name = schema.target;
  const std::size_t target_at = locate(schema.target);
  std::vector<std::size_t> at;
  for (const auto& f : schema.features) {
    Column c;
    c.name = f.name;
    c.kind = f.kind;
    c.protected_attr = f.protected_attr;
    d.columns.push_back(std::move(c));
    at.push_back(locate(f.name));
  }

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& [offset, fields] = rows[r];
    if (fields.size() != header.size())
      throw ParseError(offset, "row " + std::to_string(r) + " has " + std::to_string(fields.size()) +
                                   " fields, header has " + std::to_string(header.size()));
    for (std::size_t c = 0; c < d.columns.size(); ++c) {
      Column& col = d.columns[c];
      const std::string& raw = fields[at[c]];
      if (col.kind == FeatureKind::categorical) {
        col.labels.push_back(is_missing_token(raw) ? std::string() : raw);
      } else if (is_missing_token(raw)) {
        col.numbers.push_back(kNaN);
      } else {
        auto v = col.kind == FeatureKind::datetime ? parse_date_days(raw) : parse_double(raw);
        if (!v) throw ParseError(offset, "cannot parse '" + raw + "' in column '" + col.name + "'");
        col.numbers.push_back(*v);
      }
    }
    const std::string& y = fields[target_at];
    if (schema.positive_label) {
      d.target.push_back(y == *schema.positive_label ? 1.0 : 0.0);
    } else {
      auto v = parse_double(y);
      if (!v) throw ParseError(offset, "cannot parse target '" + y + "'");
      d.target.push_back(*v);
    }
  }

  if (schema.train_indices) {
    d.train = *schema.train_indices;
    d.test = *schema.test_indices;
  } else {
    assign_split(d, schema.test_fraction, schema.split_seed);
  }
  validate_dataset(d);
  return d;
}

std::string write_csv(const Dataset& d) {
  std::string out;
  for (const auto& c : d.columns) out += csv_escape(c.name) + ",";
  out += csv_escape(d.target_name) + "\n";
  for (std::size_t r = 0; r < d.n_rows(); ++r) {
    for (const auto& c : d.columns) {
      if (c.missing(r)) {
        out += "NA";
      } else if (c.kind == FeatureKind::categorical) {
        out += csv_escape(c.labels[r]);
      } else if (c.kind == FeatureKind::datetime) {
        out += format_date_days(c.numbers[r]);
      } else {
        out += fmt::format("{}", c.numbers[r]);
      }
      out += ',';
    }
    out += fmt::format("{}", d.target[r]) + "\n";
  }
  return out;
}

DatasetSchema schema_of(const Dataset& d) {
  DatasetSchema s;
  s.name = d.name;
  s.task = d.task;
  s.metric_primary = d.metric_primary;
  s.target = d.target_name;
  for (const auto& c : d.columns) s.features.push_back({c.name, c.kind, c.protected_attr});
  s.train_indices = d.train;
  s.test_indices = d.test;
  return s;
}

RunManifest manifest_for(const Dataset& d, std::string run_id) {
  RunManifest m;
  m.run_id = std::move(run_id);
  m.dataset_id = d.name;
  m.task = d.task;
  m.n_train = static_cast<std::int64_t>(d.train.size());
  m.n_test = static_cast<std::int64_t>(d.test.size());
  m.metric_primary = d.metric_primary;
  for (const auto& c : d.columns) m.features.push_back({c.name, c.kind, c.protected_attr});

  std::int64_t missing = 0;
  for (const auto& c : d.columns) {
    for (std::size_t r = 0; r < d.n_rows(); ++r) missing += c.missing(r);
  }
  double train_mean = 0.0;
  for (std::size_t i : d.train) train_mean += d.target[i];
  train_mean /= static_cast<double>(std::max<std::size_t>(1, d.train.size()));
  const std::string mean_name = d.task == TaskKind::classification ? "train_positive_rate" : "train_target_mean";

  m.artifacts["missing_cells"] = {"missing_cells", missing, ArtifactSource::code_trace};
  m.artifacts["n_features"] = {"n_features", static_cast<std::int64_t>(d.columns.size()), ArtifactSource::config};
  m.artifacts[mean_name] = {mean_name, std::round(train_mean * 1e4) / 1e4, ArtifactSource::metric_log};
  return m;
}

std::optional<double> parse_date_days(std::string_view text) {
  int y = 0;
  unsigned mo = 0, dd = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto num = [&](std::size_t at, std::size_t len, auto& out) {
    auto [p, ec] = std::from_chars(text.data() + at, text.data() + at + len, out);
    return ec == std::errc() && p == text.data() + at + len;
  };
  if (!num(0, 4, y) || !num(5, 2, mo) || !num(8, 2, dd)) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo}, std::chrono::day{dd}};
  if (!ymd.ok()) return std::nullopt;
  return static_cast<double>(std::chrono::sys_days(ymd).time_since_epoch().count());
}

std::string format_date_days(double days) {
  const std::chrono::sys_days sd{std::chrono::days{static_cast<long>(std::llround(days))}};
  const std::chrono::year_month_day ymd{sd};
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                     static_cast<unsigned>(ymd.day()));
}

std::uint64_t dataset_hash(const Dataset& d) {
  std::uint64_t h = fnv1a(d.name);
  auto mix_bytes = [&](const void* p, std::size_t n) {
    h = fnv1a_bytes(std::span<const std::byte>(static_cast<const std::byte*>(p), n), h);
  };
  for (const auto& c : d.columns) {
    h = fnv1a(c.name, h);
    if (c.is_numeric()) {
      mix_bytes(c.numbers.data(), c.numbers.size() * sizeof(double));
    } else {
      for (const auto& s : c.labels) h = fnv1a(std::string(s) + '\x1f', h);
    }
  }
  mix_bytes(d.target.data(), d.target.size() * sizeof(double));
  mix_bytes(d.train.data(), d.train.size() * sizeof(std::size_t));
  mix_bytes(d.test.data(), d.test.size() * sizeof(std::size_t));
  return h;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace ea
