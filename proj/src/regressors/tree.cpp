#include "soilph/regressors/tree.hpp"

#include <algorithm>
#include <numeric>

#include "soilph/error.hpp"

namespace soilph {

namespace {

// Relative margin a candidate's gain must exceed the incumbent by; closer
// candidates count as tied and the earlier one (feature, threshold) wins.
constexpr double kTieMargin = 1e-12;

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
  std::size_t n_left = 0;
};

// Presorted CART builder. Every feature keeps the node's samples sorted by
// that feature inside the same [begin, end) window; splitting stably
// partitions each window so children stay sorted.
class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, std::span<const double> y, std::span<const Eigen::Index> rows,
              const TreeParams& params, const FeatureSampling* sampling)
      : x_(x), rows_(rows), params_(params), sampling_(sampling) {
    const auto m = rows.size();
    const auto p = static_cast<std::size_t>(x.cols());
    target_.resize(m);
    for (std::size_t s = 0; s < m; ++s) target_[s] = y[static_cast<std::size_t>(rows[s])];
    order_.assign(p, std::vector<std::uint32_t>(m));
    for (std::size_t f = 0; f < p; ++f) {
      auto& ord = order_[f];
      std::iota(ord.begin(), ord.end(), 0u);
      std::stable_sort(ord.begin(), ord.end(), [&](std::uint32_t a, std::uint32_t b) {
        return value(a, f) < value(b, f);
      });
    }
    goes_left_.assign(m, 0);
    scratch_.resize(m);
    all_features_.resize(p);
    std::iota(all_features_.begin(), all_features_.end(), 0u);
  }

  RegressionTree build() {
    struct Pending {
      int node;
      std::size_t begin;
      std::size_t end;
      int depth;
    };
    std::vector<TreeNode> nodes(1);
    std::vector<Pending> stack{{0, 0, target_.size(), 0}};
    while (!stack.empty()) {
      auto [node_id, begin, end, depth] = stack.back();
      stack.pop_back();
      const std::size_t n = end - begin;
      // Sum in a fixed order (the first feature's sort order, or sample order).
      double sum = 0.0;
      double lo = 0.0;
      double hi = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        double t = target_[sample_at(i)];
        sum += t;
        lo = i == begin ? t : std::min(lo, t);
        hi = i == begin ? t : std::max(hi, t);
      }
      nodes[static_cast<std::size_t>(node_id)].value = sum / static_cast<double>(n);
      nodes[static_cast<std::size_t>(node_id)].n_samples = n;

      bool can_split = lo != hi && n >= static_cast<std::size_t>(params_.min_samples_split) &&
                       (!params_.max_depth || depth < *params_.max_depth) &&
                       n >= 2 * static_cast<std::size_t>(params_.min_samples_leaf);
      if (!can_split) continue;
      auto split = find_split(begin, end, nodes[static_cast<std::size_t>(node_id)].value);
      if (split.feature < 0) continue;

      partition(begin, end, split);
      int left_id = static_cast<int>(nodes.size());
      int right_id = left_id + 1;
      nodes.resize(nodes.size() + 2);
      auto& node = nodes[static_cast<std::size_t>(node_id)];
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.left = left_id;
      node.right = right_id;
      // Right pushed first so the left subtree is expanded first.
      stack.push_back({right_id, begin + split.n_left, end, depth + 1});
      stack.push_back({left_id, begin, begin + split.n_left, depth + 1});
    }
    return RegressionTree(std::move(nodes));
  }

 private:
  double value(std::uint32_t sample, std::size_t feature) const {
    return x_(rows_[sample], static_cast<Eigen::Index>(feature));
  }

  std::uint32_t sample_at(std::size_t pos) const {
    return order_.empty() ? static_cast<std::uint32_t>(pos) : order_[0][pos];
  }

  std::vector<std::uint32_t> candidate_features() {
    if (!sampling_ || sampling_->features_per_split >= all_features_.size()) return all_features_;
    // Partial Fisher-Yates draw without replacement, then ascending order so
    // tie-breaking stays by feature index.
    std::vector<std::uint32_t> pool = all_features_;
    for (std::size_t i = 0; i < sampling_->features_per_split; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(*sampling_->rng)]);
    }
    pool.resize(sampling_->features_per_split);
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  Split find_split(std::size_t begin, std::size_t end, double node_mean) {
    const std::size_t n = end - begin;
    const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    Split best;
    for (auto f : candidate_features()) {
      const auto& ord = order_[f];
      // Centered prefix sums: the SSE reduction of a split with left sum c is
      // c^2 * n / (n_left * n_right).
      double c = 0.0;
      for (std::size_t i = begin; i + 1 < end; ++i) {
        c += target_[ord[i]] - node_mean;
        std::size_t n_left = i - begin + 1;
        std::size_t n_right = n - n_left;
        double v = value(ord[i], f);
        double v_next = value(ord[i + 1], f);
        if (v == v_next || n_left < min_leaf || n_right < min_leaf) continue;
        double gain = c * c * static_cast<double>(n) /
                      (static_cast<double>(n_left) * static_cast<double>(n_right));
        // A non-pure node splits even when the best gain is zero.
        if (best.feature < 0 || gain > best.gain * (1.0 + kTieMargin)) {
          double thr = (v + v_next) / 2.0;
          if (!(thr < v_next)) thr = v;
          best = {static_cast<int>(f), thr, gain, n_left};
        }
      }
    }
    return best;
  }

  void partition(std::size_t begin, std::size_t end, const Split& split) {
    const auto f = static_cast<std::size_t>(split.feature);
    for (std::size_t i = begin; i < end; ++i) {
      auto s = order_[f][i];
      goes_left_[s] = value(s, f) <= split.threshold ? 1 : 0;
    }
    for (auto& ord : order_) {
      std::size_t l = begin;
      std::size_t r = 0;
      for (std::size_t i = begin; i < end; ++i) {
        auto s = ord[i];
        if (goes_left_[s]) {
          ord[l++] = s;
        } else {
          scratch_[r++] = s;
        }
      }
      std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(r),
                ord.begin() + static_cast<std::ptrdiff_t>(l));
    }
  }

  const Eigen::MatrixXd& x_;
  std::span<const Eigen::Index> rows_;
  const TreeParams& params_;
  const FeatureSampling* sampling_;
  std::vector<double> target_;
  std::vector<std::vector<std::uint32_t>> order_;
  std::vector<std::uint8_t> goes_left_;
  std::vector<std::uint32_t> scratch_;
  std::vector<std::uint32_t> all_features_;
};

}  // namespace

double RegressionTree::predict_row(const Eigen::MatrixXd& x, Eigen::Index row) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& n = nodes_[i];
    i = static_cast<std::size_t>(x(row, n.feature) <= n.threshold ? n.left : n.right);
  }
  return nodes_[i].value;
}

Eigen::VectorXd RegressionTree::predict(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) out(r) = predict_row(x, r);
  return out;
}

int RegressionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<int> d(nodes_.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (n.is_leaf()) continue;
    d[static_cast<std::size_t>(n.left)] = d[i] + 1;
    d[static_cast<std::size_t>(n.right)] = d[i] + 1;
    best = std::max(best, d[i] + 1);
  }
  return best;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

RegressionTree grow_tree(const Eigen::MatrixXd& x, std::span<const double> y,
                         std::span<const Eigen::Index> rows, const TreeParams& params,
                         const FeatureSampling* sampling) {
  params.validate();
  if (rows.empty()) throw_data("insufficient_data", "cannot grow a tree on zero rows");
  TreeBuilder builder(x, y, rows, params, sampling);
  return builder.build();
}

RegressionTree fit_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TreeParams& params) {
  if (x.rows() != y.size()) throw_usage("shape", "row count of X and y differ");
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(x.rows()));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  return grow_tree(x, std::span<const double>(y.data(), static_cast<std::size_t>(y.size())), rows,
                   params);
}

}  // namespace soilph
