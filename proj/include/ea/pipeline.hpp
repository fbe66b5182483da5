#pragma once

// Three-stage reference pipeline (preprocess -> features -> model) with fitted state
// kept separate from materialised artifacts, so stages can be re-run selectively.

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ea/dataset.hpp"
#include "ea/decision_log.hpp"
#include "ea/learners.hpp"

namespace ea {

/// Anything that maps dataset rows to scores: class-1 probability or regression value.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::string kind() const = 0;
  virtual TaskKind task() const = 0;
  virtual std::vector<double> predict(const Dataset& d, std::span<const std::size_t> rows) const = 0;
};

struct PipelineSpec {
  std::string scaler = "standard_scale";  // standard_scale | minmax_scale | none
  std::string imputer = "impute_mean";    // impute_mean | impute_median
  std::string features = "one_hot_encode";  // one_hot_encode | target_encode | select_top_k | poly_features
  std::map<std::string, Scalar> feature_params;
  std::string model = "fit_logistic";  // fit_logistic | fit_ridge | fit_gbt | fit_deep_mlp
  std::map<std::string, Scalar> model_params;

  std::string preprocessing_key() const;
  std::string features_key() const;
  std::string model_key() const;
  bool operator==(const PipelineSpec&) const = default;
};

/// Throws SpecError on unknown stage options.
void check_spec(const PipelineSpec& spec);

/// Imputed, scaled numeric block plus imputed categorical columns for a set of rows.
struct PreparedBlock {
  Eigen::MatrixXd numeric;
  std::vector<std::vector<std::string>> categorical;  // [column][row]
};

struct Preprocessor {
  std::vector<std::string> numeric_names;
  std::vector<std::string> categorical_names;
  std::vector<double> fill;    // per numeric column
  std::vector<double> center;  // per numeric column
  std::vector<double> scale;   // per numeric column
  std::vector<std::string> mode;

  PreparedBlock apply(const Dataset& d, std::span<const std::size_t> rows) const;
};

/// All statistics come from `train` rows only.
Preprocessor fit_preprocessor(const Dataset& d, std::span<const std::size_t> train, const std::string& scaler,
                              const std::string& imputer);

struct FeatureMap {
  std::string kind;
  std::vector<std::vector<std::string>> vocab;  // one-hot categories per categorical column
  std::vector<std::map<std::string, double>> encoding;  // target encoding per categorical column
  std::vector<double> prior;
  double smoothing = 10.0;
  std::size_t poly_columns = 0;
  std::vector<Eigen::Index> selected;  // select_top_k

  Eigen::MatrixXd apply(const PreparedBlock& block) const;
};

/// Fits the feature stage on the training block; `train_design` receives the training matrix
/// (out-of-fold encodings for target_encode).
FeatureMap fit_feature_map(const PreparedBlock& train_block, const Eigen::VectorXd& y_train, TaskKind task,
                           const std::string& kind, const std::map<std::string, Scalar>& params, std::uint64_t seed,
                           Eigen::MatrixXd& train_design);

struct FittedModel {
  TaskKind task = TaskKind::classification;
  std::string action;
  std::variant<LinearModel, StumpEnsemble> state;

  /// Probability of class 1 (classification) or predicted value (regression).
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

/// Throws FitError on degenerate targets, incompatible learners or unavailable learners.
FittedModel fit_model(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, TaskKind task, const std::string& action,
                      const std::map<std::string, Scalar>& params);

class FittedPipeline final : public Predictor {
 public:
  FittedPipeline(std::string kind, Preprocessor pre, FeatureMap features, FittedModel model)
      : kind_(std::move(kind)), pre_(std::move(pre)), features_(std::move(features)), model_(std::move(model)) {}

  std::string kind() const override { return kind_; }
  TaskKind task() const override { return model_.task; }
  std::vector<double> predict(const Dataset& d, std::span<const std::size_t> rows) const override;

  const Preprocessor& preprocessor() const { return pre_; }
  const FeatureMap& feature_map() const { return features_; }

 private:
  std::string kind_;
  Preprocessor pre_;
  FeatureMap features_;
  FittedModel model_;
};

/// Fits a full pipeline on the dataset's train rows.
std::unique_ptr<FittedPipeline> fit_pipeline(const Dataset& d, const PipelineSpec& spec, std::uint64_t seed,
                                             const std::string& kind = "");

/// Reference learners by kind: logistic | ridge | gbt_stumps. Standard scaling, mean imputation, one-hot.
std::unique_ptr<Predictor> fit_reference(const Dataset& d, const std::string& kind, std::uint64_t seed);

/// Primary-metric value of predictions on the dataset's test rows.
double primary_metric(const Dataset& d, std::span<const double> scores);

std::uint64_t matrix_hash(const Eigen::MatrixXd& m, std::uint64_t h = 0xcbf29ce484222325ULL);
std::uint64_t block_hash(const PreparedBlock& b);

struct StageArtifacts {
  PreparedBlock train_block;
  PreparedBlock test_block;
  Preprocessor pre;
  std::uint64_t hash = 0;
};

struct FeatureArtifacts {
  Eigen::MatrixXd train_design;
  Eigen::MatrixXd test_design;
  FeatureMap map;
  std::uint64_t hash = 0;
};

struct ExecutionResult {
  double metric = 0.0;
  std::vector<double> scores;
  std::uint64_t preprocessing_hash = 0;
  std::uint64_t features_hash = 0;
  /// Stages actually computed for this call (0 = preprocessing, 1 = features, 2 = model).
  std::array<bool, 3> executed{false, false, false};
};

/// Runs pipelines on one dataset, caching upstream artifacts by stage key so a changed
/// decision re-runs only the stages downstream of it. Thread-safe.
class PipelineExecutor {
 public:
  PipelineExecutor(const Dataset& d, std::uint64_t seed) : data_(d), seed_(seed) {}

  ExecutionResult run(const PipelineSpec& spec);
  /// Recomputes every stage without touching the cache.
  ExecutionResult run_full(const PipelineSpec& spec) const;

  const Dataset& dataset() const { return data_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::shared_ptr<const StageArtifacts> preprocess(const PipelineSpec& spec) const;
  std::shared_ptr<const FeatureArtifacts> featurize(const PipelineSpec& spec, const StageArtifacts& pre) const;
  ExecutionResult finish(const PipelineSpec& spec, const StageArtifacts& pre, const FeatureArtifacts& feat) const;

  const Dataset& data_;
  std::uint64_t seed_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<const StageArtifacts>> pre_cache_;
  std::map<std::string, std::shared_ptr<const FeatureArtifacts>> feat_cache_;
};

Eigen::VectorXd target_vector(const Dataset& d, std::span<const std::size_t> rows);

}  // namespace ea
