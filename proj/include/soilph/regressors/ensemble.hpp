#pragma once

#include <vector>

#include <Eigen/Dense>

#include "soilph/regressors/hyperparameters.hpp"
#include "soilph/regressors/tree.hpp"

namespace soilph {

// Mean of independently grown trees.
struct ForestModel {
  std::vector<RegressionTree> trees;

  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
};

// Bootstrap-aggregated CART trees with ceil(max_features * p) candidate
// features per split. Tree t draws from its own generator seeded from
// (seed, t), so results do not depend on `workers`.
ForestModel fit_random_forest(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                              const ForestParams& params, std::size_t workers = 1);

// F_0 = mean(y); F_m = F_{m-1} + learning_rate * tree_m, each tree fitted to
// the residuals y - F_{m-1} (squared loss).
struct BoostedModel {
  double init = 0.0;
  double learning_rate = 0.1;
  std::vector<RegressionTree> trees;
  // Training MSE of F_0 .. F_M (size M + 1); not serialized.
  std::vector<double> stage_train_mse;

  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
  // Prediction of the first `stages` trees; 0 gives the constant F_0.
  Eigen::VectorXd predict_stages(const Eigen::MatrixXd& x, std::size_t stages) const;
};

BoostedModel fit_gbrt(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GbrtParams& params);

// splitmix64 step; used to derive independent per-tree seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace soilph
