#include "soilph/regressors/ensemble.hpp"

#include <numeric>

#include "soilph/error.hpp"

namespace soilph {

Eigen::VectorXd BoostedModel::predict(const Eigen::MatrixXd& x) const {
  return predict_stages(x, trees.size());
}

Eigen::VectorXd BoostedModel::predict_stages(const Eigen::MatrixXd& x, std::size_t stages) const {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(x.rows(), init);
  stages = std::min(stages, trees.size());
  for (std::size_t m = 0; m < stages; ++m) out += learning_rate * trees[m].predict(x);
  return out;
}

BoostedModel fit_gbrt(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GbrtParams& params) {
  params.validate();
  if (x.rows() != y.size()) throw_usage("shape", "row count of X and y differ");
  if (x.rows() < 1) throw_data("insufficient_data", "cannot fit boosting on zero rows");
  const auto n = static_cast<std::size_t>(x.rows());

  BoostedModel model;
  model.init = y.mean();
  model.learning_rate = params.learning_rate;
  TreeParams tree_params{params.max_depth, params.min_samples_split, params.min_samples_leaf};
  std::vector<Eigen::Index> rows(n);
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});

  Eigen::VectorXd fitted = Eigen::VectorXd::Constant(x.rows(), model.init);
  Eigen::VectorXd residual = y - fitted;
  model.stage_train_mse.push_back(residual.squaredNorm() / static_cast<double>(n));
  for (int m = 0; m < params.n_stages; ++m) {
    auto tree = grow_tree(x, std::span<const double>(residual.data(), n), rows, tree_params);
    fitted += params.learning_rate * tree.predict(x);
    residual = y - fitted;
    model.stage_train_mse.push_back(residual.squaredNorm() / static_cast<double>(n));
    model.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace soilph
