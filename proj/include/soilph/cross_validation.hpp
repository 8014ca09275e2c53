#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "soilph/feature_builder.hpp"
#include "soilph/metrics.hpp"
#include "soilph/regressors/model.hpp"

namespace soilph {

struct Protocol {
  enum class Kind { kfold, holdout };
  Kind kind = Kind::kfold;
  std::size_t k = 5;
  double test_fraction = 0.2;
  std::uint64_t seed = 42;

  void validate() const;
  std::string describe() const;
};

// Fold index per row: a seeded shuffle followed by contiguous folds whose
// sizes differ by at most one (the first n % k folds are larger).
// Throws Error{usage, "folds"} unless 2 <= k <= n.
std::vector<std::size_t> kfold_assignment(std::size_t n, std::size_t k, std::uint64_t seed);

struct CvResult {
  std::vector<MetricPair> folds;
  MetricPair aggregate;
  std::vector<std::size_t> fold_of_row;
};

CvResult kfold_cv(const DesignMatrix& dm, const ModelSpec& spec, std::size_t k, std::uint64_t seed,
                  std::size_t workers = 1);

// Single shuffled train/test split; test_fraction in (0, 1).
CvResult holdout_split(const DesignMatrix& dm, const ModelSpec& spec, double test_fraction,
                       std::uint64_t seed, std::size_t workers = 1);

CvResult evaluate_protocol(const DesignMatrix& dm, const ModelSpec& spec, const Protocol& protocol,
                           std::size_t workers = 1);

}  // namespace soilph
