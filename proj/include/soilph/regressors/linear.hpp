#pragma once

#include <optional>

#include <Eigen/Dense>

#include "soilph/regressors/hyperparameters.hpp"

namespace soilph {

// Per-column centering and scaling (population standard deviation).
// Constant columns keep scale 1 so they map to 0.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& x);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
};

// y = intercept + coef . z, where z is x itself or its standardized form.
struct LinearModel {
  Eigen::VectorXd coef;
  double intercept = 0.0;
  std::optional<Standardizer> standardizer;
  bool converged = true;
  int iterations = 0;

  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
  // Coefficients and intercept expressed on the raw input columns.
  Eigen::VectorXd raw_coefficients() const;
  double raw_intercept() const;
};

// Least squares with intercept via complete orthogonal decomposition of the
// centered design; rank-deficient designs get the minimum-norm slope vector.
// Throws Error{data, "insufficient_data"} for fewer than 2 rows.
LinearModel fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

// Cyclic coordinate descent on (1/2n)||y - Z b||^2 + alpha ||b||_1 over
// standardized columns Z with centered y. Stops when the largest coefficient
// change of a sweep drops below tol; `converged` is false if max_iter sweeps
// were not enough.
LinearModel fit_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const LassoParams& params);

double soft_threshold(double value, double threshold);

}  // namespace soilph
