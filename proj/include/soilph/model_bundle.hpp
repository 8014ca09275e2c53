#pragma once

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "soilph/categorical.hpp"
#include "soilph/feature_builder.hpp"
#include "soilph/feature_spec.hpp"
#include "soilph/regressors/model.hpp"

namespace soilph {

// Everything prediction needs besides the field data: the fitted model, the
// feature spec it was trained on and the categorical vocabularies.
struct ModelBundle {
  RegressionModel model;
  FeatureSpec spec;
  std::vector<CategoricalEncoder> encoders;
  std::size_t training_rows = 0;

  nlohmann::json to_json() const;
  // Error{data, "model_format"} on anything that is not a bundle of the
  // current version.
  static ModelBundle from_json(const nlohmann::json& j);

  void save(const std::filesystem::path& path) const;
  static ModelBundle load(const std::filesystem::path& path);
};

ModelBundle train_bundle(const DesignMatrix& dm, const FeatureSpec& spec, const ModelSpec& model_spec,
                         std::size_t workers = 1);

struct BundlePrediction {
  std::vector<RowHandle> row_fields;  // fields with complete features
  Eigen::VectorXd predicted;
  std::size_t unseen_categories = 0;
};

// Features are computed against `ds` itself (each field excluded from its
// own neighborhood), so predicting on the training file reproduces the
// in-sample predictions.
BundlePrediction predict_bundle(const ModelBundle& bundle, const FieldDataset& ds,
                                std::size_t workers = 1);

}  // namespace soilph
