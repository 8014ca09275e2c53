#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "soilph/regressors/hyperparameters.hpp"

namespace soilph {

// Internal nodes send x[feature] <= threshold left; leaves carry the mean
// training target that reached them.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  std::size_t n_samples = 0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  double predict_row(const Eigen::MatrixXd& x, Eigen::Index row) const;
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& root() const { return nodes_.front(); }
  int depth() const;
  std::size_t leaf_count() const;

 private:
  std::vector<TreeNode> nodes_;
};

// Per-split feature subsampling for random forests.
struct FeatureSampling {
  std::size_t features_per_split;
  std::mt19937_64* rng;
};

// CART regression tree over the (possibly repeated) training rows `rows`.
// Splits maximize the reduction of squared error; thresholds are midpoints of
// consecutive distinct values; ties go to the lower feature index, then the
// lower threshold.
RegressionTree grow_tree(const Eigen::MatrixXd& x, std::span<const double> y,
                         std::span<const Eigen::Index> rows, const TreeParams& params,
                         const FeatureSampling* sampling = nullptr);

// Throws Error{data, "insufficient_data"} on an empty training set.
RegressionTree fit_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TreeParams& params);

}  // namespace soilph
