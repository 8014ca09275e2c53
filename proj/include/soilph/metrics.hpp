#pragma once

#include <span>

#include <Eigen/Dense>

namespace soilph {

// r2 is NaN when undefined (constant target within a fold).
struct MetricPair {
  double r2 = 0.0;
  double mae = 0.0;
};

// 1 - SS_res / SS_tot with SS_tot about mean(y). Throws
// Error{data, "degenerate_target"} for a constant y and Error{usage, "shape"}
// for empty or mismatched inputs.
double r2_score(std::span<const double> y, std::span<const double> yhat);
double mae(std::span<const double> y, std::span<const double> yhat);

double r2_score(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat);
double mae(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat);

// Unweighted mean over folds, independent of fold order. NaN r2 entries are
// skipped; the result is NaN if none is defined.
MetricPair mean_metrics(std::span<const MetricPair> folds);

}  // namespace soilph
