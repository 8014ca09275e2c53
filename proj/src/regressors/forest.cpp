#include "soilph/regressors/ensemble.hpp"

#include <cmath>
#include <numeric>

#include "soilph/error.hpp"
#include "soilph/parallel.hpp"

namespace soilph {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

Eigen::VectorXd ForestModel::predict(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.rows());
  for (const auto& t : trees) out += t.predict(x);
  if (!trees.empty()) out /= static_cast<double>(trees.size());
  return out;
}

ForestModel fit_random_forest(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                              const ForestParams& params, std::size_t workers) {
  params.validate();
  if (x.rows() != y.size()) throw_usage("shape", "row count of X and y differ");
  if (x.rows() < 1) throw_data("insufficient_data", "cannot fit a forest on zero rows");
  const auto n = static_cast<std::size_t>(x.rows());
  const auto p = static_cast<std::size_t>(x.cols());
  const auto per_split = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(params.max_features * static_cast<double>(p) - 1e-12)));
  std::span<const double> target(y.data(), n);

  ForestModel model;
  model.trees.resize(static_cast<std::size_t>(params.n_trees));
  parallel_for(model.trees.size(), workers, [&](std::size_t t) {
    std::mt19937_64 rng(mix_seed(params.seed, t));
    std::vector<Eigen::Index> rows(n);
    if (params.bootstrap) {
      std::uniform_int_distribution<Eigen::Index> draw(0, static_cast<Eigen::Index>(n) - 1);
      for (auto& r : rows) r = draw(rng);
    } else {
      std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    }
    FeatureSampling sampling{per_split, &rng};
    model.trees[t] = grow_tree(x, target, rows, params.tree, &sampling);
  });
  return model;
}

}  // namespace soilph
