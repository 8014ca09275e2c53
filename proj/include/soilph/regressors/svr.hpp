#pragma once

#include <functional>
#include <span>

#include <Eigen/Dense>

#include "soilph/regressors/hyperparameters.hpp"
#include "soilph/regressors/linear.hpp"

namespace soilph {

// Solution of the epsilon-SVR dual
//   min 1/2 (a - a*)' K (a - a*) + eps * sum(a + a*) - y' (a - a*)
//   s.t. sum(a - a*) = 0, 0 <= a, a* <= C.
struct SvrDualSolution {
  Eigen::VectorXd alpha;
  Eigen::VectorXd alpha_star;
  double bias = 0.0;  // f(x) = sum (a_i - a*_i) K(x_i, x) + bias
  double objective = 0.0;
  long iterations = 0;
  bool converged = false;
};

// Supplies row i of the n x n kernel matrix.
using KernelRowFn = std::function<std::span<const double>(Eigen::Index)>;

// SMO with second-order working-set selection on the 2n-variable form of the
// dual. Stops when the maximal KKT violation m(b) - M(b) drops below tol.
SvrDualSolution solve_svr_dual(Eigen::Index n, const KernelRowFn& kernel_row,
                               std::span<const double> kernel_diag, const Eigen::VectorXd& y,
                               double c, double epsilon, double tol, long max_iter);
SvrDualSolution solve_svr_dual(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& y, double c,
                               double epsilon, double tol, long max_iter);

struct SvrModel {
  Standardizer standardizer;
  KernelKind kernel = KernelKind::rbf;
  double gamma = 1.0;
  Eigen::MatrixXd support_vectors;  // standardized rows
  Eigen::VectorXd dual_coef;        // a_i - a*_i for each support vector
  double bias = 0.0;
  bool converged = true;
  long iterations = 0;

  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
};

double kernel_value(KernelKind kind, double gamma, const Eigen::Ref<const Eigen::RowVectorXd>& a,
                    const Eigen::Ref<const Eigen::RowVectorXd>& b);

// Standardizes X, resolves the default rbf gamma 1 / (p * var(Z)) and solves
// the dual. Throws Error{data, "insufficient_data"} for fewer than 2 rows.
SvrModel fit_svr(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const SvrParams& params);

}  // namespace soilph
