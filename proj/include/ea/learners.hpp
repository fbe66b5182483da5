#pragma once

// Reference learners on dense design matrices: L2 logistic regression (Newton),
// closed-form ridge, and gradient-boosted decision stumps.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace ea {

struct LinearModel {
  Eigen::VectorXd w;
  double b = 0.0;

  Eigen::VectorXd decision(const Eigen::MatrixXd& X) const;
};

/// Minimises sum of log-losses + l2/2 * |w|^2 (intercept unpenalised). y in {0,1}.
LinearModel fit_logistic_irls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double l2, int max_iter = 100);

/// Centered ridge regression: (Xc'Xc + alpha I) w = Xc'yc, b = mean(y) - mean(X) w.
LinearModel fit_ridge_closed_form(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha);

Eigen::VectorXd sigmoid(const Eigen::VectorXd& z);

struct Stump {
  Eigen::Index feature = 0;
  double threshold = 0.0;  // x <= threshold goes left
  double left = 0.0;
  double right = 0.0;
};

struct StumpEnsemble {
  bool logistic = false;
  double base = 0.0;
  double learning_rate = 0.1;
  std::vector<Stump> stumps;

  /// Raw additive score (log-odds for the logistic loss).
  Eigen::VectorXd raw(const Eigen::MatrixXd& X) const;
};

struct StumpOptions {
  std::size_t n_estimators = 200;
  double learning_rate = 0.1;
  std::size_t max_bins = 32;
  double l2 = 1.0;
};

StumpEnsemble fit_gbt_stumps(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, bool logistic,
                             const StumpOptions& options = {});

}  // namespace ea
