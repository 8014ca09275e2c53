#include "soilph/regressors/svr.hpp"

#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>
#include <vector>

#include "soilph/error.hpp"

namespace soilph {

namespace {

constexpr double kTau = 1e-12;
// Full kernel matrices are precomputed up to this many rows; larger problems
// use an LRU row cache.
constexpr Eigen::Index kDenseKernelLimit = 4096;
constexpr std::size_t kCacheRows = 2048;

class RowCache {
 public:
  RowCache(KernelRowFn fn, std::size_t capacity) : fn_(std::move(fn)), capacity_(capacity) {}

  std::span<const double> row(Eigen::Index i) {
    auto it = map_.find(i);
    if (it != map_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second.pos);
      return it->second.data;
    }
    if (map_.size() >= capacity_) {
      map_.erase(lru_.back());
      lru_.pop_back();
    }
    auto src = fn_(i);
    lru_.push_front(i);
    auto& e = map_[i];
    e.data.assign(src.begin(), src.end());
    e.pos = lru_.begin();
    return e.data;
  }

 private:
  struct Entry {
    std::vector<double> data;
    std::list<Eigen::Index>::iterator pos;
  };
  KernelRowFn fn_;
  std::size_t capacity_;
  std::list<Eigen::Index> lru_;
  std::unordered_map<Eigen::Index, Entry> map_;
};

}  // namespace

SvrDualSolution solve_svr_dual(Eigen::Index n, const KernelRowFn& kernel_row,
                               std::span<const double> kernel_diag, const Eigen::VectorXd& y,
                               double c, double epsilon, double tol, long max_iter) {
  const Eigen::Index l = 2 * n;
  // Variables b_t: t < n are a_t (sign +1), t >= n are a*_{t-n} (sign -1).
  std::vector<double> beta(static_cast<std::size_t>(l), 0.0);
  std::vector<double> grad(static_cast<std::size_t>(l));
  std::vector<double> lin(static_cast<std::size_t>(l));
  std::vector<int> sign(static_cast<std::size_t>(l));
  std::vector<double> qd(static_cast<std::size_t>(l));
  for (Eigen::Index i = 0; i < n; ++i) {
    auto a = static_cast<std::size_t>(i);
    auto b = static_cast<std::size_t>(i + n);
    lin[a] = epsilon - y(i);
    lin[b] = epsilon + y(i);
    sign[a] = 1;
    sign[b] = -1;
    qd[a] = qd[b] = kernel_diag[a];
  }
  grad = lin;

  // Row t of the signed 2n x 2n matrix: Q_ts = sign_t sign_s K(t mod n, s mod n).
  auto q_entry = [&](std::span<const double> k_row, std::size_t t, std::size_t s) {
    return static_cast<double>(sign[t] * sign[s]) * k_row[s % static_cast<std::size_t>(n)];
  };
  auto at_upper = [&](std::size_t t) { return beta[t] >= c; };
  auto at_lower = [&](std::size_t t) { return beta[t] <= 0.0; };

  SvrDualSolution sol;
  const auto L = static_cast<std::size_t>(l);
  long iter = 0;
  while (true) {
    // Working set selection: i maximizes -y_t G_t over I_up, j minimizes the
    // second-order objective decrease over I_low.
    double g_max = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t i_sel = -1;
    for (std::size_t t = 0; t < L; ++t) {
      if (sign[t] == 1) {
        if (!at_upper(t) && -grad[t] >= g_max) {
          g_max = -grad[t];
          i_sel = static_cast<std::ptrdiff_t>(t);
        }
      } else if (!at_lower(t) && grad[t] >= g_max) {
        g_max = grad[t];
        i_sel = static_cast<std::ptrdiff_t>(t);
      }
    }
    double g_max2 = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t j_sel = -1;
    double obj_diff_min = std::numeric_limits<double>::infinity();
    std::span<const double> k_i;
    if (i_sel >= 0) k_i = kernel_row(static_cast<Eigen::Index>(static_cast<std::size_t>(i_sel) % static_cast<std::size_t>(n)));
    for (std::size_t t = 0; t < L && i_sel >= 0; ++t) {
      auto i = static_cast<std::size_t>(i_sel);
      double q_it = q_entry(k_i, i, t);
      if (sign[t] == 1) {
        if (!at_lower(t)) {
          double grad_diff = g_max + grad[t];
          g_max2 = std::max(g_max2, grad[t]);
          if (grad_diff > 0.0) {
            double quad = qd[i] + qd[t] - 2.0 * sign[i] * q_it;
            double obj = -(grad_diff * grad_diff) / (quad > 0.0 ? quad : kTau);
            if (obj <= obj_diff_min) {
              j_sel = static_cast<std::ptrdiff_t>(t);
              obj_diff_min = obj;
            }
          }
        }
      } else if (!at_upper(t)) {
        double grad_diff = g_max - grad[t];
        g_max2 = std::max(g_max2, -grad[t]);
        if (grad_diff > 0.0) {
          double quad = qd[i] + qd[t] + 2.0 * sign[i] * q_it;
          double obj = -(grad_diff * grad_diff) / (quad > 0.0 ? quad : kTau);
          if (obj <= obj_diff_min) {
            j_sel = static_cast<std::ptrdiff_t>(t);
            obj_diff_min = obj;
          }
        }
      }
    }
    if (i_sel < 0 || j_sel < 0 || g_max + g_max2 < tol) {
      sol.converged = true;
      break;
    }
    if (iter >= max_iter) break;
    ++iter;

    auto i = static_cast<std::size_t>(i_sel);
    auto j = static_cast<std::size_t>(j_sel);
    auto k_j = kernel_row(static_cast<Eigen::Index>(j % static_cast<std::size_t>(n)));
    // Refetch: a cache eviction may have invalidated k_i.
    k_i = kernel_row(static_cast<Eigen::Index>(i % static_cast<std::size_t>(n)));
    double q_ij = q_entry(k_i, i, j);
    double old_i = beta[i];
    double old_j = beta[j];
    if (sign[i] != sign[j]) {
      double quad = qd[i] + qd[j] + 2.0 * q_ij;
      if (quad <= 0.0) quad = kTau;
      double delta = (-grad[i] - grad[j]) / quad;
      double diff = beta[i] - beta[j];
      beta[i] += delta;
      beta[j] += delta;
      if (diff > 0.0) {
        if (beta[j] < 0.0) {
          beta[j] = 0.0;
          beta[i] = diff;
        }
      } else if (beta[i] < 0.0) {
        beta[i] = 0.0;
        beta[j] = -diff;
      }
      if (diff > 0.0) {
        if (beta[i] > c) {
          beta[i] = c;
          beta[j] = c - diff;
        }
      } else if (beta[j] > c) {
        beta[j] = c;
        beta[i] = c + diff;
      }
    } else {
      double quad = qd[i] + qd[j] - 2.0 * q_ij;
      if (quad <= 0.0) quad = kTau;
      double delta = (grad[i] - grad[j]) / quad;
      double sum = beta[i] + beta[j];
      beta[i] -= delta;
      beta[j] += delta;
      if (sum > c) {
        if (beta[i] > c) {
          beta[i] = c;
          beta[j] = sum - c;
        }
      } else if (beta[j] < 0.0) {
        beta[j] = 0.0;
        beta[i] = sum;
      }
      if (sum > c) {
        if (beta[j] > c) {
          beta[j] = c;
          beta[i] = sum - c;
        }
      } else if (beta[i] < 0.0) {
        beta[i] = 0.0;
        beta[j] = sum;
      }
    }
    double d_i = beta[i] - old_i;
    double d_j = beta[j] - old_j;
    for (std::size_t t = 0; t < L; ++t) {
      grad[t] += q_entry(k_i, i, t) * d_i + q_entry(k_j, j, t) * d_j;
    }
  }
  sol.iterations = iter;

  // Bias from free variables, or the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  long n_free = 0;
  for (std::size_t t = 0; t < L; ++t) {
    double yg = sign[t] * grad[t];
    if (at_upper(t)) {
      if (sign[t] == -1) {
        ub = std::min(ub, yg);
      } else {
        lb = std::max(lb, yg);
      }
    } else if (at_lower(t)) {
      if (sign[t] == 1) {
        ub = std::min(ub, yg);
      } else {
        lb = std::max(lb, yg);
      }
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
  sol.bias = -rho;

  double obj = 0.0;
  for (std::size_t t = 0; t < L; ++t) obj += beta[t] * (grad[t] + lin[t]);
  sol.objective = obj / 2.0;

  sol.alpha.resize(n);
  sol.alpha_star.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    sol.alpha(i) = beta[static_cast<std::size_t>(i)];
    sol.alpha_star(i) = beta[static_cast<std::size_t>(i + n)];
  }
  return sol;
}

SvrDualSolution solve_svr_dual(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& y, double c,
                               double epsilon, double tol, long max_iter) {
  if (kernel.rows() != kernel.cols() || kernel.rows() != y.size()) {
    throw_usage("shape", "kernel must be n x n with n = len(y)");
  }
  const Eigen::Index n = y.size();
  // Eigen is column-major; for a symmetric kernel column i equals row i.
  std::vector<double> diag(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) diag[static_cast<std::size_t>(i)] = kernel(i, i);
  KernelRowFn row = [&](Eigen::Index i) {
    return std::span<const double>(kernel.col(i).data(), static_cast<std::size_t>(n));
  };
  return solve_svr_dual(n, row, diag, y, c, epsilon, tol, max_iter);
}

double kernel_value(KernelKind kind, double gamma, const Eigen::Ref<const Eigen::RowVectorXd>& a,
                    const Eigen::Ref<const Eigen::RowVectorXd>& b) {
  if (kind == KernelKind::linear) return a.dot(b);
  return std::exp(-gamma * (a - b).squaredNorm());
}

Eigen::VectorXd SvrModel::predict(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd z = standardizer.apply(x);
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    double s = bias;
    for (Eigen::Index k = 0; k < support_vectors.rows(); ++k) {
      s += dual_coef(k) * kernel_value(kernel, gamma, support_vectors.row(k), z.row(r));
    }
    out(r) = s;
  }
  return out;
}

SvrModel fit_svr(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const SvrParams& params) {
  params.validate();
  if (x.rows() != y.size()) throw_usage("shape", "row count of X and y differ");
  if (x.rows() < 2) throw_data("insufficient_data", "at least 2 rows are required");

  SvrModel model;
  model.kernel = params.kernel;
  model.standardizer = Standardizer::fit(x);
  Eigen::MatrixXd z = model.standardizer.apply(x);
  const Eigen::Index n = z.rows();

  if (params.gamma) {
    model.gamma = *params.gamma;
  } else {
    double mean = z.mean();
    double var = (z.array() - mean).square().mean();
    model.gamma = var > 0.0 && z.cols() > 0 ? 1.0 / (static_cast<double>(z.cols()) * var) : 1.0;
  }

  SvrDualSolution sol;
  if (n <= kDenseKernelLimit) {
    Eigen::MatrixXd k(n, n);
    if (model.kernel == KernelKind::linear) {
      k = z * z.transpose();
    } else {
      Eigen::VectorXd sq = z.rowwise().squaredNorm();
      k = z * z.transpose();
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
          double d2 = std::max(0.0, sq(i) + sq(j) - 2.0 * k(i, j));
          k(i, j) = std::exp(-model.gamma * d2);
        }
      }
      k.diagonal().setOnes();
    }
    // Enforce exact symmetry so rows and columns coincide.
    k = (0.5 * (k + k.transpose())).eval();
    sol = solve_svr_dual(k, y, params.c, params.epsilon, params.tol, params.max_iter);
  } else {
    std::vector<double> diag(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      diag[static_cast<std::size_t>(i)] = kernel_value(model.kernel, model.gamma, z.row(i), z.row(i));
    }
    std::vector<double> buffer(static_cast<std::size_t>(n));
    RowCache cache(
        [&](Eigen::Index i) {
          for (Eigen::Index j = 0; j < n; ++j) {
            buffer[static_cast<std::size_t>(j)] = kernel_value(model.kernel, model.gamma, z.row(i), z.row(j));
          }
          return std::span<const double>(buffer);
        },
        kCacheRows);
    KernelRowFn row = [&](Eigen::Index i) { return cache.row(i); };
    sol = solve_svr_dual(n, row, diag, y, params.c, params.epsilon, params.tol, params.max_iter);
  }

  std::vector<Eigen::Index> sv;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (sol.alpha(i) - sol.alpha_star(i) != 0.0) sv.push_back(i);
  }
  model.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), z.cols());
  model.dual_coef.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t k = 0; k < sv.size(); ++k) {
    auto kk = static_cast<Eigen::Index>(k);
    model.support_vectors.row(kk) = z.row(sv[k]);
    model.dual_coef(kk) = sol.alpha(sv[k]) - sol.alpha_star(sv[k]);
  }
  model.bias = sol.bias;
  model.converged = sol.converged;
  model.iterations = sol.iterations;
  return model;
}

}  // namespace soilph
