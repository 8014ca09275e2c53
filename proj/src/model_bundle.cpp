#include "soilph/model_bundle.hpp"

#include <algorithm>
#include <fstream>

#include "soilph/error.hpp"
#include "soilph/spatial_index.hpp"

namespace soilph {

using nlohmann::json;

namespace {

constexpr const char* kBundleFormat = "soilph-bundle";

}  // namespace

json ModelBundle::to_json() const {
  json encs = json::array();
  for (const auto& e : encoders) {
    encs.push_back({{"scheme", std::string(soilph::to_string(e.scheme()))}, {"categories", e.categories()}});
  }
  return {{"format", kBundleFormat},
          {"version", kModelFormatVersion},
          {"features", spec.to_string()},
          {"encoding", std::string(soilph::to_string(spec.encoding))},
          {"encoders", encs},
          {"training_rows", training_rows},
          {"model", model.to_json()}};
}

ModelBundle ModelBundle::from_json(const json& j) {
  if (!j.is_object() || j.value("format", std::string()) != kBundleFormat) {
    throw_data("model_format", "not a soilph model bundle");
  }
  if (j.value("version", -1) != kModelFormatVersion) {
    throw_data("model_format", "unsupported bundle version " + j.value("version", json()).dump());
  }
  try {
    auto spec = FeatureSpec::parse(j.at("features").get<std::string>(),
                                   encoding_from_string(j.at("encoding").get<std::string>()));
    std::vector<CategoricalEncoder> encoders;
    for (const auto& e : j.at("encoders")) {
      encoders.emplace_back(encoding_from_string(e.at("scheme").get<std::string>()),
                            e.at("categories").get<std::vector<std::string>>());
    }
    auto model = RegressionModel::from_json(j.at("model"));
    return {std::move(model), std::move(spec), std::move(encoders), j.value("training_rows", std::size_t{0})};
  } catch (const json::exception& e) {
    throw_data("model_format", e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::data) throw;
    throw_data("model_format", e.what());
  }
}

void ModelBundle::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw_runtime("io", "cannot write model file '" + path.string() + "'");
  out << to_json().dump(1) << '\n';
  if (!out) throw_runtime("io", "write failed for '" + path.string() + "'");
}

ModelBundle ModelBundle::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_data("io", "cannot open model file '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw_data("model_format", std::string("invalid JSON: ") + e.what());
  }
  return from_json(j);
}

ModelBundle train_bundle(const DesignMatrix& dm, const FeatureSpec& spec, const ModelSpec& model_spec,
                         std::size_t workers) {
  auto model = fit_model(model_spec, dm.x, dm.y, dm.column_names, workers);
  return {std::move(model), spec, dm.encoders, static_cast<std::size_t>(dm.rows())};
}

BundlePrediction predict_bundle(const ModelBundle& bundle, const FieldDataset& ds, std::size_t workers) {
  auto radii = bundle.spec.radii();
  if (radii.empty()) radii.push_back(1.0);  // location-only spec; any index radius will do
  auto idx = SpatialIndex::build(ds, radii.back());
  auto rows = build_feature_rows(ds, idx, bundle.spec, bundle.encoders, workers);
  BundlePrediction out;
  out.row_fields = std::move(rows.row_fields);
  out.unseen_categories = rows.unseen_categories;
  out.predicted = bundle.model.predict(rows.x, rows.column_names);
  return out;
}

}  // namespace soilph
