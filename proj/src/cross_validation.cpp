#include "soilph/cross_validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "soilph/error.hpp"

namespace soilph {

namespace {

std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& y, const std::vector<Eigen::Index>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = y(rows[i]);
  return out;
}

MetricPair score_fold(const DesignMatrix& dm, const ModelSpec& spec,
                      const std::vector<std::size_t>& fold_of_row, std::size_t fold,
                      std::size_t workers) {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> test;
  for (std::size_t r = 0; r < fold_of_row.size(); ++r) {
    (fold_of_row[r] == fold ? test : train).push_back(static_cast<Eigen::Index>(r));
  }
  auto model = fit_model(spec, take_rows(dm.x, train), take(dm.y, train), dm.column_names, workers);
  Eigen::VectorXd y_test = take(dm.y, test);
  Eigen::VectorXd pred = model.predict(take_rows(dm.x, test));
  MetricPair m;
  m.mae = mae(y_test, pred);
  try {
    m.r2 = r2_score(y_test, pred);
  } catch (const Error& e) {
    if (e.code() != "degenerate_target") throw;
    m.r2 = std::numeric_limits<double>::quiet_NaN();
  }
  return m;
}

}  // namespace

void Protocol::validate() const {
  if (kind == Kind::kfold && k < 2) throw_usage("protocol", "k-fold needs k >= 2");
  if (kind == Kind::holdout && !(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw_usage("protocol", "holdout fraction must be in (0, 1)");
  }
}

std::string Protocol::describe() const {
  if (kind == Kind::kfold) return fmt::format("kfold(k={}, seed={})", k, seed);
  return fmt::format("holdout(test_fraction={}, seed={})", test_fraction, seed);
}

std::vector<std::size_t> kfold_assignment(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2 || k > n) {
    throw_usage("folds", fmt::format("k = {} folds is invalid for {} rows", k, n));
  }
  auto perm = shuffled(n, seed);
  std::vector<std::size_t> fold_of_row(n);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    std::size_t size = n / k + (f < n % k ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) fold_of_row[perm[pos++]] = f;
  }
  return fold_of_row;
}

CvResult kfold_cv(const DesignMatrix& dm, const ModelSpec& spec, std::size_t k, std::uint64_t seed,
                  std::size_t workers) {
  CvResult res;
  res.fold_of_row = kfold_assignment(static_cast<std::size_t>(dm.rows()), k, seed);
  for (std::size_t f = 0; f < k; ++f) res.folds.push_back(score_fold(dm, spec, res.fold_of_row, f, workers));
  res.aggregate = mean_metrics(res.folds);
  return res;
}

CvResult holdout_split(const DesignMatrix& dm, const ModelSpec& spec, double test_fraction,
                       std::uint64_t seed, std::size_t workers) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw_usage("protocol", "holdout fraction must be in (0, 1)");
  }
  const auto n = static_cast<std::size_t>(dm.rows());
  auto n_test = static_cast<std::size_t>(std::ceil(test_fraction * static_cast<double>(n)));
  if (n_test < 1 || n_test >= n) throw_usage("folds", "holdout split leaves an empty side");
  auto perm = shuffled(n, seed);
  CvResult res;
  res.fold_of_row.assign(n, 1);
  for (std::size_t i = 0; i < n_test; ++i) res.fold_of_row[perm[i]] = 0;
  res.folds.push_back(score_fold(dm, spec, res.fold_of_row, 0, workers));
  res.aggregate = res.folds.front();
  return res;
}

CvResult evaluate_protocol(const DesignMatrix& dm, const ModelSpec& spec, const Protocol& protocol,
                           std::size_t workers) {
  protocol.validate();
  if (protocol.kind == Protocol::Kind::kfold) return kfold_cv(dm, spec, protocol.k, protocol.seed, workers);
  return holdout_split(dm, spec, protocol.test_fraction, protocol.seed, workers);
}

}  // namespace soilph
