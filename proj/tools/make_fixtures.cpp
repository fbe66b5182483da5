// Writes the bundled synthetic stand-ins for the five benchmark datasets, their clean decision
// logs and the published per-decision impact table into a directory.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "ea/dataset.hpp"
#include "ea/decision_log.hpp"
#include "ea/errors.hpp"
#include "ea/fault_catalog.hpp"
#include "ea/seeding.hpp"

namespace {

using namespace ea;

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::string_view key) : rng(derive_seed(20240601, key)) {}

  double normal(double mu, double sd) { return std::normal_distribution<double>(mu, sd)(rng); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  bool chance(double p) { return uniform(0.0, 1.0) < p; }
  std::string pick(const std::vector<std::string>& levels, const std::vector<double>& weights) {
    std::discrete_distribution<std::size_t> d(weights.begin(), weights.end());
    return levels[d(rng)];
  }
};

double clampd(double v, double lo, double hi) { return std::clamp(v, lo, hi); }
double round_dp(double v, int dp) {
  const double s = std::pow(10.0, dp);
  return std::round(v * s) / s;
}
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

class Builder {
 public:
  Builder(std::string name, TaskKind task, MetricKind metric, std::string target) {
    d_.name = std::move(name);
    d_.task = task;
    d_.metric_primary = metric;
    d_.target_name = std::move(target);
  }
  void numeric(const std::string& n, FeatureKind kind = FeatureKind::numeric) { add(n, kind, false); }
  void categorical(const std::string& n, bool prot = false) { add(n, FeatureKind::categorical, prot); }

  void set(const std::string& n, double v) { d_.column(n).numbers.push_back(v); }
  void set(const std::string& n, std::string v) { d_.column(n).labels.push_back(std::move(v)); }
  void target(double y) { d_.target.push_back(y); }

  Dataset finish() {
    assign_split(d_, 0.2, 0);
    validate_dataset(d_);
    return std::move(d_);
  }

 private:
  void add(const std::string& n, FeatureKind k, bool prot) {
    Column c;
    c.name = n;
    c.kind = k;
    c.protected_attr = prot;
    d_.columns.push_back(std::move(c));
  }
  Dataset d_;
};

Dataset german_credit() {
  Gen g("german_credit");
  Builder b("german_credit", TaskKind::classification, MetricKind::accuracy, "credit_good");
  for (const char* n : {"duration", "credit_amount", "age", "installment_rate"}) b.numeric(n);
  for (const char* n : {"checking_status", "credit_history", "purpose", "savings"}) b.categorical(n);
  b.categorical("sex", true);
  b.categorical("foreign_worker");
  const std::map<std::string, double> chk{{"A11", -0.9}, {"A12", -0.5}, {"A13", 0.2}, {"A14", 1.0}};
  const std::map<std::string, double> hist{{"A30", -1.0}, {"A31", -0.9}, {"A32", 0.0}, {"A33", 0.1}, {"A34", 0.6}};
  const std::map<std::string, double> sav{{"A61", -0.3}, {"A62", -0.1}, {"A63", 0.2}, {"A64", 0.5}, {"A65", 0.3}};
  for (int i = 0; i < 1000; ++i) {
    const double duration = clampd(std::round(g.normal(21, 12)), 4, 72);
    const double amount = std::round(clampd(std::exp(g.normal(7.9, 0.75)), 250, 18500));
    const double age = clampd(std::round(g.normal(35, 11)), 19, 75);
    const double rate = g.integer(1, 4);
    const std::string c = g.pick({"A11", "A12", "A13", "A14"}, {0.27, 0.27, 0.06, 0.40});
    const std::string h = g.pick({"A30", "A31", "A32", "A33", "A34"}, {0.04, 0.05, 0.53, 0.09, 0.29});
    const std::string p = g.pick({"car_new", "car_used", "furniture", "radio_tv", "appliances", "repairs", "education",
                                  "retraining", "business", "other"},
                                 {0.23, 0.10, 0.18, 0.28, 0.01, 0.02, 0.05, 0.01, 0.10, 0.02});
    const std::string s = g.pick({"A61", "A62", "A63", "A64", "A65"}, {0.60, 0.10, 0.06, 0.05, 0.19});
    const std::string sex = g.pick({"male", "female"}, {0.69, 0.31});
    const std::string fw = g.pick({"yes", "no"}, {0.96, 0.04});
    const double z = 1.0 - 0.04 * (duration - 21) - 0.0001 * (amount - 3200) + 0.015 * (age - 35) - 0.1 * (rate - 2.5) +
                     chk.at(c) + hist.at(h) + sav.at(s) + (sex == "female" ? -0.15 : 0.0) + (fw == "no" ? 0.8 : 0.0) +
                     (p == "car_used" ? 0.5 : 0.0) + (p == "education" ? -0.4 : 0.0);
    b.set("duration", duration);
    b.set("credit_amount", amount);
    b.set("age", age);
    b.set("installment_rate", rate);
    b.set("checking_status", c);
    b.set("credit_history", h);
    b.set("purpose", p);
    b.set("savings", s);
    b.set("sex", sex);
    b.set("foreign_worker", fw);
    b.target(g.chance(sigmoid(z)) ? 1.0 : 0.0);
  }
  return b.finish();
}

Dataset adult_income() {
  Gen g("adult_income");
  Builder b("adult_income", TaskKind::classification, MetricKind::accuracy, "income_gt_50k");
  for (const char* n : {"age", "education_num", "hours_per_week", "capital_gain"}) b.numeric(n);
  b.numeric("record_date", FeatureKind::datetime);
  for (const char* n : {"workclass", "occupation", "marital_status", "race"}) b.categorical(n);
  b.categorical("sex", true);
  const std::vector<std::string> occupations{"exec_managerial", "prof_specialty", "tech_support", "sales",
                                             "craft_repair",    "adm_clerical",   "machine_op",   "transport",
                                             "handlers",        "farming",        "other_service", "protective"};
  const std::vector<double> occ_effect{1.1, 1.0, 0.6, 0.3, 0.0, -0.2, -0.4, -0.3, -0.8, -0.9, -1.2, 0.4};
  const double day0 = *parse_date_days("2019-01-01");
  for (int i = 0; i < 8000; ++i) {
    const double age = clampd(std::round(g.normal(38.6, 13.6)), 17, 90);
    const double edu = clampd(std::round(g.normal(10, 2.6)), 1, 16);
    const double hours = clampd(std::round(g.normal(40, 12)), 1, 99);
    const double gain = g.chance(0.08) ? std::round(std::exp(g.normal(8.5, 1.0))) : 0.0;
    const double day = day0 + g.integer(0, 1095);
    const std::string wc = g.pick({"private", "self_emp", "government", "other"}, {0.70, 0.11, 0.13, 0.06});
    const std::size_t occ = static_cast<std::size_t>(g.integer(0, 11));
    const std::string sex = g.pick({"male", "female"}, {0.67, 0.33});
    const std::string ms = g.pick({"married", "never_married", "divorced", "other"},
                                  sex == "male" ? std::vector<double>{0.56, 0.28, 0.10, 0.06}
                                                : std::vector<double>{0.26, 0.42, 0.22, 0.10});
    const std::string race = g.pick({"white", "black", "asian_pac", "other"}, {0.85, 0.10, 0.03, 0.02});
    const double z = -6.2 + 0.045 * std::min(age, 60.0) + 0.28 * edu + 0.03 * hours + (gain > 0 ? 1.6 : 0.0) +
                     (ms == "married" ? 1.9 : 0.0) + (sex == "male" ? 0.3 : 0.0) + occ_effect[occ] +
                     (wc == "self_emp" ? 0.3 : 0.0) + 0.0003 * (day - day0);
    b.set("age", age);
    b.set("education_num", edu);
    b.set("hours_per_week", hours);
    b.set("capital_gain", gain);
    b.set("record_date", day);
    b.set("workclass", wc);
    b.set("occupation", occupations[occ]);
    b.set("marital_status", ms);
    b.set("race", race);
    b.set("sex", sex);
    b.target(g.chance(sigmoid(z)) ? 1.0 : 0.0);
  }
  return b.finish();
}

Dataset titanic() {
  Gen g("titanic");
  Builder b("titanic", TaskKind::classification, MetricKind::accuracy, "survived");
  for (const char* n : {"pclass", "age", "sibsp", "parch", "fare"}) b.numeric(n);
  b.categorical("sex", true);
  b.categorical("embarked");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < 1309; ++i) {
    const double pclass = std::stod(g.pick({"1", "2", "3"}, {0.25, 0.21, 0.54}));
    const std::string sex = g.pick({"male", "female"}, {0.64, 0.36});
    double age = round_dp(clampd(g.normal(pclass == 1 ? 38 : pclass == 2 ? 30 : 25, 13), 0.42, 80), 1);
    const double sibsp = std::stod(g.pick({"0", "1", "2", "3", "4"}, {0.68, 0.24, 0.03, 0.02, 0.03}));
    const double parch = std::stod(g.pick({"0", "1", "2", "3"}, {0.76, 0.13, 0.09, 0.02}));
    const double fare = round_dp(std::exp(g.normal(pclass == 1 ? std::log(80) : pclass == 2 ? std::log(21) : std::log(10),
                                                   pclass == 1 ? 0.6 : 0.45)),
                                 2);
    std::string emb = g.pick({"S", "C", "Q"}, {0.70, 0.21, 0.09});
    const double z = -0.2 + (sex == "female" ? 2.5 : 0.0) - 0.9 * (pclass - 1) - 0.025 * (age - 30) - 0.3 * sibsp +
                     (emb == "C" ? 0.3 : 0.0);
    const bool y = g.chance(sigmoid(z));
    if (g.chance(pclass == 3 ? 0.27 : 0.12)) age = nan;
    if (g.chance(0.002)) emb = "";
    b.set("pclass", pclass);
    b.set("age", age);
    b.set("sibsp", sibsp);
    b.set("parch", parch);
    b.set("fare", fare);
    b.set("sex", sex);
    b.set("embarked", emb);
    b.target(y ? 1.0 : 0.0);
  }
  return b.finish();
}

Dataset diabetes() {
  Gen g("diabetes");
  Builder b("diabetes", TaskKind::regression, MetricKind::rmse, "progression");
  b.numeric("age");
  b.categorical("sex");
  for (const char* n : {"bmi", "bp", "s1", "s2", "s3", "s4", "s5", "s6"}) b.numeric(n);
  for (int i = 0; i < 442; ++i) {
    const double age = clampd(std::round(g.normal(48.5, 13)), 19, 79);
    const std::string sex = g.pick({"1", "2"}, {0.53, 0.47});
    const double bmi = round_dp(clampd(g.normal(26.4, 4.4), 18, 42.2), 1);
    const double bp = round_dp(clampd(g.normal(94.6, 13.8), 62, 133), 1);
    const double s1 = std::round(g.normal(189, 34));
    const double s2 = round_dp(0.75 * s1 - 26 + g.normal(0, 18), 1);
    const double s3 = round_dp(clampd(g.normal(49.8, 12.9), 22, 99), 1);
    const double s4 = round_dp(clampd(s1 / s3 + g.normal(0, 0.4), 2, 9.1), 2);
    const double s5 = round_dp(g.normal(4.64, 0.52), 4);
    const double s6 = std::round(g.normal(91, 11.5));
    double y = 152 + 10.5 * (bmi - 26.4) + 0.9 * (bp - 94.6) + 60 * (s5 - 4.64) - 1.2 * (s3 - 49.8) +
               (sex == "2" ? -8.0 : 0.0) + g.normal(0, 52);
    y = std::round(clampd(y, 25, 346));
    b.set("age", age);
    b.set("sex", sex);
    b.set("bmi", bmi);
    b.set("bp", bp);
    b.set("s1", s1);
    b.set("s2", s2);
    b.set("s3", s3);
    b.set("s4", s4);
    b.set("s5", s5);
    b.set("s6", s6);
    b.target(y);
  }
  return b.finish();
}

Dataset ca_housing() {
  Gen g("ca_housing");
  Builder b("ca_housing", TaskKind::regression, MetricKind::rmse, "median_house_value");
  for (const char* n : {"median_income", "housing_median_age", "ave_rooms", "ave_bedrooms", "population", "ave_occupancy",
                        "latitude", "longitude"}) {
    b.numeric(n);
  }
  b.numeric("sale_date", FeatureKind::datetime);
  b.categorical("ocean_proximity");
  const std::map<std::string, double> ocean{
      {"lt_1h_ocean", 0.25}, {"inland", -0.75}, {"near_ocean", 0.3}, {"near_bay", 0.35}, {"island", 0.8}};
  const double day0 = *parse_date_days("2015-01-01");
  for (int i = 0; i < 6000; ++i) {
    const double inc = round_dp(clampd(std::exp(g.normal(1.27, 0.45)), 0.5, 15), 4);
    const double hage = g.integer(1, 52);
    const double rooms = round_dp(clampd(g.normal(5.4, 1.2), 1.5, 12), 3);
    const double bed = round_dp(clampd(g.normal(1.07, 0.1), 0.7, 2), 3);
    const double pop = std::round(std::exp(g.normal(7.0, 0.7)));
    const double occ = round_dp(clampd(g.normal(3.0, 0.6), 1, 7), 3);
    const double lat = round_dp(g.uniform(32.5, 42.0), 2);
    const double lon = round_dp(-114.3 - (lat - 32.5) * 0.85 - g.uniform(0, 3.5), 2);
    const double day = day0 + g.integer(0, 1460);
    const std::string op = g.pick({"lt_1h_ocean", "inland", "near_ocean", "near_bay", "island"},
                                  {0.44, 0.32, 0.13, 0.108, 0.002});
    double y = 0.6 + 0.42 * inc + ocean.at(op) + 0.006 * hage - 0.12 * (occ - 3.0) + 0.05 * (rooms - 5.4) +
               0.0002 * (day - day0) + g.normal(0, 0.45);
    y = round_dp(clampd(y, 0.15, 5.0), 3);
    b.set("median_income", inc);
    b.set("housing_median_age", hage);
    b.set("ave_rooms", rooms);
    b.set("ave_bedrooms", bed);
    b.set("population", pop);
    b.set("ave_occupancy", occ);
    b.set("latitude", lat);
    b.set("longitude", lon);
    b.set("sale_date", day);
    b.set("ocean_proximity", op);
    b.target(y);
  }
  return b.finish();
}

// Per-decision impacts (percent, positive = improvement) behind the published counterfactual
// summary: three points per stage per dataset.
nlohmann::json published_impacts() {
  const std::vector<std::pair<std::string, std::vector<std::vector<double>>>> rows{
      {"german_credit", {{-3.6, 0.1, 0.0}, {0.5, -0.3, 0.4}, {5.4, 2.0, 1.5}}},
      {"adult_income", {{0.1, 0.0, 0.1}, {-3.5, 0.4, 0.3}, {4.7, -2.9, 1.0}}},
      {"titanic", {{6.0, 0.1, 0.0}, {1.0, -0.2, 0.8}, {4.0, 3.0, 1.5}}},
      {"diabetes", {{0.1, 0.0, 0.1}, {-4.9, 0.3, 0.2}, {8.3, 1.0, 0.5}}},
      {"ca_housing", {{0.1, 0.0, 0.1}, {6.6, 2.0, 1.0}, {-2.5, 1.5, 0.5}}},
  };
  const char* stages[] = {"preprocessing", "feature_engineering", "model_selection"};
  auto out = nlohmann::json::array();
  for (const auto& [name, per_stage] : rows) {
    for (std::size_t s = 0; s < 3; ++s) {
      for (double v : per_stage[s]) out.push_back({{"dataset", name}, {"stage", stages[s]}, {"impact", v}});
    }
  }
  return out;
}

void write_fixture(const std::filesystem::path& dir, const Dataset& d) {
  DatasetSchema schema = schema_of(d);
  schema.train_indices.reset();
  schema.test_indices.reset();
  schema.test_fraction = 0.2;
  schema.split_seed = 0;
  write_file((dir / (d.name + ".csv")).string(), write_csv(d));
  write_file((dir / (d.name + ".schema.json")).string(), to_json(schema).dump(2) + "\n");

  RunLog log;
  log.manifest = manifest_for(d, d.name + "-run-01");
  log.decisions = clean_pipeline(log.manifest, 25);
  write_file((dir / "logs" / (d.name + ".json")).string(), serialize_run_log(log));

  double pos = 0.0;
  for (double y : d.target) pos += y;
  std::printf("%-14s rows=%zu train=%zu test=%zu target_mean=%.4f\n", d.name.c_str(), d.n_rows(), d.train.size(),
              d.test.size(), pos / static_cast<double>(d.n_rows()));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: make_fixtures OUT_DIR\n");
    return 1;
  }
  try {
    const std::filesystem::path dir(argv[1]);
    std::filesystem::create_directories(dir / "logs");
    for (const auto& d : {german_credit(), adult_income(), titanic(), diabetes(), ca_housing()}) write_fixture(dir, d);
    write_file((dir / "published_impacts.json").string(), published_impacts().dump(2) + "\n");
  } catch (const std::exception& e) {
    std::fprintf(stderr, "make_fixtures: %s\n", e.what());
    return 1;
  }
  return 0;
}
