#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace soilph {

enum class ModelKind { LR, LASSO, DTR, RF, GBRT, SVR };

std::string_view to_string(ModelKind kind);
// Case-insensitive: "lr", "lasso", "dtr", "rf", "gbrt", "svr".
ModelKind model_kind_from_string(std::string_view name);
std::vector<ModelKind> parse_model_list(std::string_view csv_list);
const std::vector<ModelKind>& all_model_kinds();

// Defaults follow the scikit-learn estimators of the same name.

struct LassoParams {
  double alpha = 1.0;
  double tol = 1e-4;  // on the largest coefficient change per sweep
  int max_iter = 1000;

  void validate() const;
};

struct TreeParams {
  std::optional<int> max_depth;  // nullopt = unlimited
  int min_samples_split = 2;
  int min_samples_leaf = 1;

  void validate() const;
};

struct ForestParams {
  int n_trees = 100;
  double max_features = 1.0;  // fraction of features drawn per split
  bool bootstrap = true;
  std::uint64_t seed = 42;
  TreeParams tree;

  void validate() const;
};

struct GbrtParams {
  int n_stages = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  int min_samples_split = 2;
  int min_samples_leaf = 1;

  void validate() const;
};

enum class KernelKind { rbf, linear };

struct SvrParams {
  double c = 1.0;
  double epsilon = 0.1;
  KernelKind kernel = KernelKind::rbf;
  std::optional<double> gamma;  // nullopt = 1 / (p * var(X)) on standardized X
  double tol = 1e-3;
  long max_iter = 10'000'000;

  void validate() const;
};

// Settings for every model kind; only the block matching the kind is used.
struct Hyperparameters {
  LassoParams lasso;
  TreeParams tree;
  ForestParams forest;
  GbrtParams gbrt;
  SvrParams svr;

  void validate() const;
};

struct ModelSpec {
  ModelKind kind = ModelKind::LR;
  Hyperparameters hp;
};

// Missing keys keep their defaults, unknown keys are an error
// (Error{usage, "hyperparameter"}). Bounds are checked after reading.
void to_json(nlohmann::json& j, const Hyperparameters& hp);
void from_json(const nlohmann::json& j, Hyperparameters& hp);
// Only the block used by `kind`.
nlohmann::json hyperparameters_json(ModelKind kind, const Hyperparameters& hp);

}  // namespace soilph
