#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "soilph/regressors/ensemble.hpp"
#include "soilph/regressors/hyperparameters.hpp"
#include "soilph/regressors/linear.hpp"
#include "soilph/regressors/svr.hpp"
#include "soilph/regressors/tree.hpp"

namespace soilph {

inline constexpr int kModelFormatVersion = 1;

// A fitted predictor of any kind behind one predict/serialize surface.
// Immutable once built; concurrent predict calls are safe.
class RegressionModel {
 public:
  using State = std::variant<LinearModel, RegressionTree, ForestModel, BoostedModel, SvrModel>;

  RegressionModel(ModelKind kind, Hyperparameters hp, std::vector<std::string> feature_names,
                  State state);

  ModelKind kind() const { return kind_; }
  const Hyperparameters& hyperparameters() const { return hp_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const State& state() const { return state_; }

  // False when an iterative solver (LASSO, SVR) stopped at max_iter.
  bool converged() const;

  // Throws Error{data, "schema_mismatch"} when the column count differs.
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
  // Also checks the column names, in order.
  Eigen::VectorXd predict(const Eigen::MatrixXd& x, std::span<const std::string> column_names) const;

  nlohmann::json to_json() const;
  // Throws Error{data, "model_format"} for a foreign document or a version
  // other than kModelFormatVersion.
  static RegressionModel from_json(const nlohmann::json& j);

 private:
  ModelKind kind_;
  Hyperparameters hp_;
  std::vector<std::string> feature_names_;
  State state_;
};

RegressionModel fit_model(const ModelSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          std::vector<std::string> feature_names, std::size_t workers = 1);

}  // namespace soilph
