#include "ea/learners.hpp"

#include <algorithm>
#include <cmath>

#include "ea/errors.hpp"

namespace ea {

Eigen::VectorXd LinearModel::decision(const Eigen::MatrixXd& X) const {
  return (X * w).array() + b;
}

Eigen::VectorXd sigmoid(const Eigen::VectorXd& z) {
  return z.unaryExpr([](double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
}

LinearModel fit_logistic_irls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double l2, int max_iter) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (n == 0) throw FitError("logistic regression on zero rows");
  Eigen::MatrixXd A(n, p + 1);
  A.col(0).setOnes();
  A.rightCols(p) = X;

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p + 1);
  const double mean_y = y.mean();
  theta(0) = std::log(std::clamp(mean_y, 1e-6, 1 - 1e-6) / (1 - std::clamp(mean_y, 1e-6, 1 - 1e-6)));
  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(p + 1, l2);
  penalty(0) = 1e-10;

  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd prob = sigmoid(A * theta);
    const Eigen::VectorXd weight = (prob.array() * (1.0 - prob.array())).max(1e-12);
    Eigen::VectorXd grad = A.transpose() * (prob - y);
    grad.array() += penalty.array() * theta.array();
    Eigen::MatrixXd H = A.transpose() * weight.asDiagonal() * A;
    H.diagonal() += penalty;
    const Eigen::VectorXd step = H.ldlt().solve(grad);
    if (!step.allFinite()) throw FitError("logistic Newton step diverged");
    theta -= step;
    if (step.lpNorm<Eigen::Infinity>() < 1e-10) break;
  }
  LinearModel m;
  m.b = theta(0);
  m.w = theta.tail(p);
  return m;
}

LinearModel fit_ridge_closed_form(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha) {
  if (X.rows() == 0) throw FitError("ridge regression on zero rows");
  const Eigen::RowVectorXd mu = X.colwise().mean();
  const double ybar = y.mean();
  const Eigen::MatrixXd Xc = X.rowwise() - mu;
  const Eigen::VectorXd yc = y.array() - ybar;
  Eigen::MatrixXd G = Xc.transpose() * Xc;
  G.diagonal().array() += std::max(alpha, 1e-10);
  LinearModel m;
  m.w = G.ldlt().solve(Xc.transpose() * yc);
  if (!m.w.allFinite()) throw FitError("ridge solve produced non-finite weights");
  m.b = ybar - mu.dot(m.w);
  return m;
}

Eigen::VectorXd StumpEnsemble::raw(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(X.rows(), base);
  for (const auto& s : stumps) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      out(i) += learning_rate * (X(i, s.feature) <= s.threshold ? s.left : s.right);
    }
  }
  return out;
}

StumpEnsemble fit_gbt_stumps(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, bool logistic,
                             const StumpOptions& opt) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (n == 0) throw FitError("boosting on zero rows");

  // Candidate thresholds per feature: distinct quantiles of the training column.
  std::vector<std::vector<double>> cuts(static_cast<std::size_t>(p));
  std::vector<std::vector<std::uint16_t>> bin(static_cast<std::size_t>(p), std::vector<std::uint16_t>(n));
  for (Eigen::Index j = 0; j < p; ++j) {
    std::vector<double> col(X.col(j).data(), X.col(j).data() + n);
    std::sort(col.begin(), col.end());
    auto& c = cuts[j];
    for (std::size_t q = 1; q < opt.max_bins; ++q) {
      const double v = col[std::min<std::size_t>(col.size() - 1, q * col.size() / opt.max_bins)];
      if (v < col.back() && (c.empty() || v > c.back())) c.push_back(v);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      bin[j][i] = static_cast<std::uint16_t>(std::lower_bound(c.begin(), c.end(), X(i, j)) - c.begin());
    }
  }

  StumpEnsemble model;
  model.logistic = logistic;
  model.learning_rate = opt.learning_rate;
  const double mean_y = y.mean();
  model.base = logistic ? std::log(std::clamp(mean_y, 1e-6, 1 - 1e-6) / (1 - std::clamp(mean_y, 1e-6, 1 - 1e-6)))
                        : mean_y;
  Eigen::VectorXd score = Eigen::VectorXd::Constant(n, model.base);
  Eigen::VectorXd g(n), h(n);
  std::vector<double> gsum, hsum;

  for (std::size_t round = 0; round < opt.n_estimators; ++round) {
    if (logistic) {
      const Eigen::VectorXd prob = sigmoid(score);
      g = prob - y;
      h = (prob.array() * (1.0 - prob.array())).max(1e-12);
    } else {
      g = score - y;
      h.setOnes();
    }
    const double G = g.sum();
    const double H = h.sum();
    const double parent = G * G / (H + opt.l2);
    double best_gain = 1e-12;
    Stump best;
    bool found = false;
    for (Eigen::Index j = 0; j < p; ++j) {
      const auto& c = cuts[j];
      if (c.empty()) continue;
      gsum.assign(c.size() + 1, 0.0);
      hsum.assign(c.size() + 1, 0.0);
      for (Eigen::Index i = 0; i < n; ++i) {
        gsum[bin[j][i]] += g(i);
        hsum[bin[j][i]] += h(i);
      }
      double gl = 0, hl = 0;
      for (std::size_t k = 0; k < c.size(); ++k) {
        gl += gsum[k];
        hl += hsum[k];
        const double gr = G - gl;
        const double hr = H - hl;
        const double gain = gl * gl / (hl + opt.l2) + gr * gr / (hr + opt.l2) - parent;
        if (gain > best_gain) {
          best_gain = gain;
          best = {j, c[k], -gl / (hl + opt.l2), -gr / (hr + opt.l2)};
          found = true;
        }
      }
    }
    if (!found) break;
    model.stumps.push_back(best);
    for (Eigen::Index i = 0; i < n; ++i) {
      score(i) += opt.learning_rate * (X(i, best.feature) <= best.threshold ? best.left : best.right);
    }
  }
  return model;
}

}  // namespace ea
