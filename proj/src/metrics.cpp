#include "soilph/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "soilph/error.hpp"

namespace soilph {

namespace {

void check(std::span<const double> y, std::span<const double> yhat) {
  if (y.empty() || y.size() != yhat.size()) {
    throw_usage("shape", "metric inputs must be non-empty and of equal length");
  }
}

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

double sorted_mean(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

double r2_score(std::span<const double> y, std::span<const double> yhat) {
  check(y, yhat);
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss_tot = 0.0;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_tot += (y[i] - mean) * (y[i] - mean);
    ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
  }
  if (ss_tot == 0.0) throw_data("degenerate_target", "R^2 is undefined for a constant target");
  return 1.0 - ss_res / ss_tot;
}

double mae(std::span<const double> y, std::span<const double> yhat) {
  check(y, yhat);
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) sum += std::abs(y[i] - yhat[i]);
  return sum / static_cast<double>(y.size());
}

double r2_score(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
  return r2_score(as_span(y), as_span(yhat));
}

double mae(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) { return mae(as_span(y), as_span(yhat)); }

MetricPair mean_metrics(std::span<const MetricPair> folds) {
  if (folds.empty()) throw_usage("shape", "no folds to aggregate");
  std::vector<double> r2;
  std::vector<double> abs_err;
  for (const auto& f : folds) {
    if (!std::isnan(f.r2)) r2.push_back(f.r2);
    abs_err.push_back(f.mae);
  }
  return {r2.empty() ? std::numeric_limits<double>::quiet_NaN() : sorted_mean(r2), sorted_mean(abs_err)};
}

}  // namespace soilph
