#include "soilph/regressors/linear.hpp"

#include <cmath>

#include "soilph/error.hpp"

namespace soilph {

namespace {

void check_shapes(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) throw_usage("shape", "row count of X and y differ");
  if (x.rows() < 2) throw_data("insufficient_data", "at least 2 rows are required");
}

}  // namespace

double soft_threshold(double value, double threshold) {
  if (value > threshold) return value - threshold;
  if (value < -threshold) return value + threshold;
  return 0.0;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& x) {
  Standardizer s;
  auto n = static_cast<double>(x.rows());
  s.mean = x.colwise().mean().transpose();
  s.scale.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    double var = (x.col(j).array() - s.mean(j)).square().sum() / n;
    double sd = std::sqrt(var);
    // Treat columns constant up to rounding as constant.
    s.scale(j) = sd > 1e-12 * std::max(1.0, std::abs(s.mean(j))) ? sd : 1.0;
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
  return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

Eigen::VectorXd LinearModel::predict(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd out;
  if (standardizer) {
    out = standardizer->apply(x) * coef;
  } else {
    out = x * coef;
  }
  out.array() += intercept;
  return out;
}

Eigen::VectorXd LinearModel::raw_coefficients() const {
  if (!standardizer) return coef;
  return coef.array() / standardizer->scale.array();
}

double LinearModel::raw_intercept() const {
  if (!standardizer) return intercept;
  return intercept - raw_coefficients().dot(standardizer->mean);
}

LinearModel fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  check_shapes(x, y);
  Eigen::RowVectorXd x_mean = x.colwise().mean();
  double y_mean = y.mean();
  Eigen::MatrixXd xc = x.rowwise() - x_mean;
  Eigen::VectorXd yc = y.array() - y_mean;

  LinearModel m;
  if (x.cols() == 0) {
    m.coef = Eigen::VectorXd::Zero(0);
  } else {
    // Default threshold is too tight for one-hot blocks that sum to a
    // constant. It must be set before compute(): the Z factor is built
    // for the rank seen at that point.
    double max_abs = xc.cwiseAbs().maxCoeff();
    if (max_abs > 0.0) {
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(xc.rows(), xc.cols());
      cod.setThreshold(1e-10);
      cod.compute(xc);
      m.coef = cod.solve(yc);
    } else {
      m.coef = Eigen::VectorXd::Zero(x.cols());
    }
  }
  m.intercept = y_mean - x_mean.dot(m.coef);
  return m;
}

LinearModel fit_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const LassoParams& params) {
  params.validate();
  check_shapes(x, y);
  const auto n = static_cast<double>(x.rows());
  const Eigen::Index p = x.cols();

  auto stdz = Standardizer::fit(x);
  Eigen::MatrixXd z = stdz.apply(x);
  double y_mean = y.mean();
  Eigen::VectorXd residual = y.array() - y_mean;

  Eigen::VectorXd col_norm(p);  // (1/n) z_j . z_j, 1 unless the column is constant
  for (Eigen::Index j = 0; j < p; ++j) col_norm(j) = z.col(j).squaredNorm() / n;

  LinearModel m;
  m.coef = Eigen::VectorXd::Zero(p);
  m.converged = false;
  for (int sweep = 1; sweep <= params.max_iter; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (col_norm(j) <= 0.0) continue;
      double old = m.coef(j);
      double rho = z.col(j).dot(residual) / n + col_norm(j) * old;
      double updated = soft_threshold(rho, params.alpha) / col_norm(j);
      if (updated != old) {
        residual -= (updated - old) * z.col(j);
        m.coef(j) = updated;
        max_change = std::max(max_change, std::abs(updated - old));
      }
    }
    m.iterations = sweep;
    if (max_change < params.tol) {
      m.converged = true;
      break;
    }
  }
  m.intercept = y_mean;
  m.standardizer = std::move(stdz);
  return m;
}

}  // namespace soilph
