#include "soilph/regressors/model.hpp"

#include "soilph/error.hpp"

namespace soilph {

namespace {

using nlohmann::json;

json vec_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vec_from(const json& j) {
  auto v = j.get<std::vector<double>>();
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Eigen::VectorXd row = m.row(r).transpose();
    rows.push_back(vec_json(row));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Eigen::MatrixXd matrix_from(const json& j) {
  Eigen::MatrixXd m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != m.rows()) {
    throw_data("model_format", "matrix row count mismatch");
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = vec_from(data[static_cast<std::size_t>(r)]);
    if (row.size() != m.cols()) throw_data("model_format", "matrix column count mismatch");
    m.row(r) = row.transpose();
  }
  return m;
}

json standardizer_json(const Standardizer& s) {
  return {{"mean", vec_json(s.mean)}, {"scale", vec_json(s.scale)}};
}

Standardizer standardizer_from(const json& j) {
  return {vec_from(j.at("mean")), vec_from(j.at("scale"))};
}

json tree_json(const RegressionTree& t) {
  std::vector<int> feature;
  std::vector<double> threshold;
  std::vector<int> left;
  std::vector<int> right;
  std::vector<double> value;
  std::vector<std::size_t> n_samples;
  for (const auto& n : t.nodes()) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.value);
    n_samples.push_back(n.n_samples);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left},
          {"right", right},     {"value", value},         {"n_samples", n_samples}};
}

RegressionTree tree_from(const json& j) {
  auto feature = j.at("feature").get<std::vector<int>>();
  auto threshold = j.at("threshold").get<std::vector<double>>();
  auto left = j.at("left").get<std::vector<int>>();
  auto right = j.at("right").get<std::vector<int>>();
  auto value = j.at("value").get<std::vector<double>>();
  auto n_samples = j.at("n_samples").get<std::vector<std::size_t>>();
  const auto n = feature.size();
  if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n || value.size() != n ||
      n_samples.size() != n) {
    throw_data("model_format", "inconsistent tree arrays");
  }
  std::vector<TreeNode> nodes(n);
  for (std::size_t i = 0; i < n; ++i) {
    nodes[i] = {feature[i], threshold[i], left[i], right[i], value[i], n_samples[i]};
    if (feature[i] >= 0) {
      auto in_range = [&](int c) { return c > static_cast<int>(i) && c < static_cast<int>(n); };
      if (!in_range(left[i]) || !in_range(right[i])) throw_data("model_format", "bad child index");
    }
  }
  return RegressionTree(std::move(nodes));
}

json trees_json(const std::vector<RegressionTree>& trees) {
  json out = json::array();
  for (const auto& t : trees) out.push_back(tree_json(t));
  return out;
}

std::vector<RegressionTree> trees_from(const json& j) {
  std::vector<RegressionTree> out;
  for (const auto& t : j) out.push_back(tree_from(t));
  return out;
}

}  // namespace

RegressionModel::RegressionModel(ModelKind kind, Hyperparameters hp,
                                 std::vector<std::string> feature_names, State state)
    : kind_(kind), hp_(std::move(hp)), feature_names_(std::move(feature_names)), state_(std::move(state)) {}

bool RegressionModel::converged() const {
  if (auto* lin = std::get_if<LinearModel>(&state_)) return lin->converged;
  if (auto* svr = std::get_if<SvrModel>(&state_)) return svr->converged;
  return true;
}

Eigen::VectorXd RegressionModel::predict(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.cols()) != feature_names_.size()) {
    throw_data("schema_mismatch", "model expects " + std::to_string(feature_names_.size()) +
                                      " columns, got " + std::to_string(x.cols()));
  }
  if (x.rows() == 0) return Eigen::VectorXd(0);
  return std::visit([&](const auto& m) -> Eigen::VectorXd { return m.predict(x); }, state_);
}

Eigen::VectorXd RegressionModel::predict(const Eigen::MatrixXd& x,
                                         std::span<const std::string> column_names) const {
  for (std::size_t i = 0; i < std::max(column_names.size(), feature_names_.size()); ++i) {
    if (i >= column_names.size()) {
      throw_data("schema_mismatch", "missing column '" + feature_names_[i] + "'");
    }
    if (i >= feature_names_.size() || column_names[i] != feature_names_[i]) {
      throw_data("schema_mismatch", "column " + std::to_string(i + 1) + ": got '" + column_names[i] + "'" +
                                        (i < feature_names_.size() ? ", expected '" + feature_names_[i] + "'" : ""));
    }
  }
  return predict(x);
}

nlohmann::json RegressionModel::to_json() const {
  json j;
  j["format"] = "soilph-model";
  j["version"] = kModelFormatVersion;
  j["kind"] = std::string(to_string(kind_));
  j["hyperparameters"] = hp_;
  j["feature_names"] = feature_names_;
  json params;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          params["coef"] = vec_json(m.coef);
          params["intercept"] = m.intercept;
          params["standardizer"] = m.standardizer ? standardizer_json(*m.standardizer) : json(nullptr);
          params["converged"] = m.converged;
          params["iterations"] = m.iterations;
        } else if constexpr (std::is_same_v<T, RegressionTree>) {
          params["tree"] = tree_json(m);
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          params["trees"] = trees_json(m.trees);
        } else if constexpr (std::is_same_v<T, BoostedModel>) {
          params["init"] = m.init;
          params["learning_rate"] = m.learning_rate;
          params["trees"] = trees_json(m.trees);
        } else {
          params["standardizer"] = standardizer_json(m.standardizer);
          params["kernel"] = m.kernel == KernelKind::rbf ? "rbf" : "linear";
          params["gamma"] = m.gamma;
          params["support_vectors"] = matrix_json(m.support_vectors);
          params["dual_coef"] = vec_json(m.dual_coef);
          params["bias"] = m.bias;
          params["converged"] = m.converged;
          params["iterations"] = m.iterations;
        }
      },
      state_);
  j["parameters"] = params;
  return j;
}

RegressionModel RegressionModel::from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != "soilph-model") {
    throw_data("model_format", "not a soilph model document");
  }
  if (!j.contains("version") || !j["version"].is_number_integer() ||
      j["version"].get<int>() != kModelFormatVersion) {
    throw_data("model_format", "unsupported model version (expected " +
                                   std::to_string(kModelFormatVersion) + ")");
  }
  try {
    auto kind = model_kind_from_string(j.at("kind").get<std::string>());
    auto hp = j.at("hyperparameters").get<Hyperparameters>();
    auto names = j.at("feature_names").get<std::vector<std::string>>();
    const auto& p = j.at("parameters");
    State state;
    switch (kind) {
      case ModelKind::LR:
      case ModelKind::LASSO: {
        LinearModel m;
        m.coef = vec_from(p.at("coef"));
        m.intercept = p.at("intercept").get<double>();
        if (!p.at("standardizer").is_null()) m.standardizer = standardizer_from(p.at("standardizer"));
        m.converged = p.at("converged").get<bool>();
        m.iterations = p.at("iterations").get<int>();
        state = std::move(m);
        break;
      }
      case ModelKind::DTR: state = tree_from(p.at("tree")); break;
      case ModelKind::RF: state = ForestModel{trees_from(p.at("trees"))}; break;
      case ModelKind::GBRT: {
        BoostedModel m;
        m.init = p.at("init").get<double>();
        m.learning_rate = p.at("learning_rate").get<double>();
        m.trees = trees_from(p.at("trees"));
        state = std::move(m);
        break;
      }
      case ModelKind::SVR: {
        SvrModel m;
        m.standardizer = standardizer_from(p.at("standardizer"));
        m.kernel = p.at("kernel").get<std::string>() == "linear" ? KernelKind::linear : KernelKind::rbf;
        m.gamma = p.at("gamma").get<double>();
        m.support_vectors = matrix_from(p.at("support_vectors"));
        m.dual_coef = vec_from(p.at("dual_coef"));
        m.bias = p.at("bias").get<double>();
        m.converged = p.at("converged").get<bool>();
        m.iterations = p.at("iterations").get<long>();
        state = std::move(m);
        break;
      }
    }
    return RegressionModel(kind, std::move(hp), std::move(names), std::move(state));
  } catch (const nlohmann::json::exception& e) {
    throw_data("model_format", e.what());
  }
}

RegressionModel fit_model(const ModelSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          std::vector<std::string> feature_names, std::size_t workers) {
  if (feature_names.size() != static_cast<std::size_t>(x.cols())) {
    throw_usage("shape", "feature name count does not match column count");
  }
  RegressionModel::State state;
  switch (spec.kind) {
    case ModelKind::LR: state = fit_ols(x, y); break;
    case ModelKind::LASSO: state = fit_lasso(x, y, spec.hp.lasso); break;
    case ModelKind::DTR: state = fit_tree(x, y, spec.hp.tree); break;
    case ModelKind::RF: state = fit_random_forest(x, y, spec.hp.forest, workers); break;
    case ModelKind::GBRT: state = fit_gbrt(x, y, spec.hp.gbrt); break;
    case ModelKind::SVR: state = fit_svr(x, y, spec.hp.svr); break;
  }
  return RegressionModel(spec.kind, spec.hp, std::move(feature_names), std::move(state));
}

}  // namespace soilph
