#include "soilph/regressors/hyperparameters.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "soilph/csv.hpp"
#include "soilph/error.hpp"

namespace soilph {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw_usage("hyperparameter", what);
}

// Reads known keys from `j` into `fields`; anything else is rejected.
template <typename Fn>
void read_object(const nlohmann::json& j, std::string_view block,
                 std::initializer_list<std::string_view> keys, Fn&& read) {
  if (!j.is_object()) require(false, std::string(block) + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(keys.begin(), keys.end(), it.key()) == keys.end()) {
      require(false, "unknown key '" + it.key() + "' in " + std::string(block));
    }
  }
  try {
    read(j);
  } catch (const nlohmann::json::exception& e) {
    require(false, std::string(block) + ": " + e.what());
  }
}

nlohmann::json tree_json(const TreeParams& t) {
  return {{"max_depth", t.max_depth ? nlohmann::json(*t.max_depth) : nlohmann::json(nullptr)},
          {"min_samples_split", t.min_samples_split},
          {"min_samples_leaf", t.min_samples_leaf}};
}

void read_tree(const nlohmann::json& j, TreeParams& t, std::string_view block) {
  read_object(j, block, {"max_depth", "min_samples_split", "min_samples_leaf"}, [&](auto& o) {
    if (o.contains("max_depth")) {
      t.max_depth = o["max_depth"].is_null() ? std::nullopt
                                             : std::optional<int>(o["max_depth"].template get<int>());
    }
    if (o.contains("min_samples_split")) t.min_samples_split = o["min_samples_split"].template get<int>();
    if (o.contains("min_samples_leaf")) t.min_samples_leaf = o["min_samples_leaf"].template get<int>();
  });
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::LR: return "LR";
    case ModelKind::LASSO: return "LASSO";
    case ModelKind::DTR: return "DTR";
    case ModelKind::RF: return "RF";
    case ModelKind::GBRT: return "GBRT";
    case ModelKind::SVR: return "SVR";
  }
  return "LR";
}

ModelKind model_kind_from_string(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (auto k : all_model_kinds()) {
    if (to_string(k) == upper) return k;
  }
  throw_usage("model_kind", "unknown model '" + std::string(name) + "'");
}

std::vector<ModelKind> parse_model_list(std::string_view csv_list) {
  std::vector<ModelKind> out;
  for (const auto& name : csv::split_list(csv_list)) {
    auto k = model_kind_from_string(name);
    if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
  }
  if (out.empty()) throw_usage("model_kind", "empty model list");
  return out;
}

const std::vector<ModelKind>& all_model_kinds() {
  static const std::vector<ModelKind> kinds = {ModelKind::LR,  ModelKind::SVR, ModelKind::LASSO,
                                               ModelKind::DTR, ModelKind::RF,  ModelKind::GBRT};
  return kinds;
}

void LassoParams::validate() const {
  require(alpha >= 0.0 && std::isfinite(alpha), "lasso.alpha must be >= 0");
  require(tol > 0.0, "lasso.tol must be > 0");
  require(max_iter >= 1, "lasso.max_iter must be >= 1");
}

void TreeParams::validate() const {
  require(!max_depth || *max_depth >= 0, "max_depth must be >= 0");
  require(min_samples_split >= 2, "min_samples_split must be >= 2");
  require(min_samples_leaf >= 1, "min_samples_leaf must be >= 1");
}

void ForestParams::validate() const {
  require(n_trees >= 1, "forest.n_trees must be >= 1");
  require(max_features > 0.0 && max_features <= 1.0, "forest.max_features must be in (0, 1]");
  tree.validate();
}

void GbrtParams::validate() const {
  require(n_stages >= 1, "gbrt.n_stages must be >= 1");
  require(learning_rate > 0.0 && learning_rate <= 1.0, "gbrt.learning_rate must be in (0, 1]");
  require(max_depth >= 0, "gbrt.max_depth must be >= 0");
  require(min_samples_split >= 2, "gbrt.min_samples_split must be >= 2");
  require(min_samples_leaf >= 1, "gbrt.min_samples_leaf must be >= 1");
}

void SvrParams::validate() const {
  require(c > 0.0 && std::isfinite(c), "svr.C must be > 0");
  require(epsilon >= 0.0 && std::isfinite(epsilon), "svr.epsilon must be >= 0");
  require(!gamma || (*gamma > 0.0 && std::isfinite(*gamma)), "svr.gamma must be > 0");
  require(tol > 0.0, "svr.tol must be > 0");
  require(max_iter >= 1, "svr.max_iter must be >= 1");
}

void Hyperparameters::validate() const {
  lasso.validate();
  tree.validate();
  forest.validate();
  gbrt.validate();
  svr.validate();
}

nlohmann::json hyperparameters_json(ModelKind kind, const Hyperparameters& hp) {
  nlohmann::json full = hp;
  switch (kind) {
    case ModelKind::LR: return nlohmann::json::object();
    case ModelKind::LASSO: return {{"lasso", full["lasso"]}};
    case ModelKind::DTR: return {{"tree", full["tree"]}};
    case ModelKind::RF: return {{"forest", full["forest"]}};
    case ModelKind::GBRT: return {{"gbrt", full["gbrt"]}};
    case ModelKind::SVR: return {{"svr", full["svr"]}};
  }
  return nlohmann::json::object();
}

void to_json(nlohmann::json& j, const Hyperparameters& hp) {
  j = nlohmann::json{
      {"lasso", {{"alpha", hp.lasso.alpha}, {"tol", hp.lasso.tol}, {"max_iter", hp.lasso.max_iter}}},
      {"tree", tree_json(hp.tree)},
      {"forest",
       {{"n_trees", hp.forest.n_trees},
        {"max_features", hp.forest.max_features},
        {"bootstrap", hp.forest.bootstrap},
        {"seed", hp.forest.seed},
        {"tree", tree_json(hp.forest.tree)}}},
      {"gbrt",
       {{"n_stages", hp.gbrt.n_stages},
        {"learning_rate", hp.gbrt.learning_rate},
        {"max_depth", hp.gbrt.max_depth},
        {"min_samples_split", hp.gbrt.min_samples_split},
        {"min_samples_leaf", hp.gbrt.min_samples_leaf}}},
      {"svr",
       {{"C", hp.svr.c},
        {"epsilon", hp.svr.epsilon},
        {"kernel", hp.svr.kernel == KernelKind::rbf ? "rbf" : "linear"},
        {"gamma", hp.svr.gamma ? nlohmann::json(*hp.svr.gamma) : nlohmann::json(nullptr)},
        {"tol", hp.svr.tol},
        {"max_iter", hp.svr.max_iter}}}};
}

void from_json(const nlohmann::json& j, Hyperparameters& hp) {
  read_object(j, "hyperparameters", {"lasso", "tree", "forest", "gbrt", "svr"}, [&](auto& o) {
    if (o.contains("lasso")) {
      read_object(o["lasso"], "lasso", {"alpha", "tol", "max_iter"}, [&](auto& l) {
        if (l.contains("alpha")) hp.lasso.alpha = l["alpha"].template get<double>();
        if (l.contains("tol")) hp.lasso.tol = l["tol"].template get<double>();
        if (l.contains("max_iter")) hp.lasso.max_iter = l["max_iter"].template get<int>();
      });
    }
    if (o.contains("tree")) read_tree(o["tree"], hp.tree, "tree");
    if (o.contains("forest")) {
      read_object(o["forest"], "forest", {"n_trees", "max_features", "bootstrap", "seed", "tree"},
                  [&](auto& f) {
                    if (f.contains("n_trees")) hp.forest.n_trees = f["n_trees"].template get<int>();
                    if (f.contains("max_features")) {
                      hp.forest.max_features = f["max_features"].template get<double>();
                    }
                    if (f.contains("bootstrap")) hp.forest.bootstrap = f["bootstrap"].template get<bool>();
                    if (f.contains("seed")) hp.forest.seed = f["seed"].template get<std::uint64_t>();
                    if (f.contains("tree")) read_tree(f["tree"], hp.forest.tree, "forest.tree");
                  });
    }
    if (o.contains("gbrt")) {
      read_object(o["gbrt"], "gbrt",
                  {"n_stages", "learning_rate", "max_depth", "min_samples_split", "min_samples_leaf"},
                  [&](auto& g) {
                    if (g.contains("n_stages")) hp.gbrt.n_stages = g["n_stages"].template get<int>();
                    if (g.contains("learning_rate")) {
                      hp.gbrt.learning_rate = g["learning_rate"].template get<double>();
                    }
                    if (g.contains("max_depth")) hp.gbrt.max_depth = g["max_depth"].template get<int>();
                    if (g.contains("min_samples_split")) {
                      hp.gbrt.min_samples_split = g["min_samples_split"].template get<int>();
                    }
                    if (g.contains("min_samples_leaf")) {
                      hp.gbrt.min_samples_leaf = g["min_samples_leaf"].template get<int>();
                    }
                  });
    }
    if (o.contains("svr")) {
      read_object(o["svr"], "svr", {"C", "epsilon", "kernel", "gamma", "tol", "max_iter"}, [&](auto& s) {
        if (s.contains("C")) hp.svr.c = s["C"].template get<double>();
        if (s.contains("epsilon")) hp.svr.epsilon = s["epsilon"].template get<double>();
        if (s.contains("kernel")) {
          auto k = s["kernel"].template get<std::string>();
          require(k == "rbf" || k == "linear", "svr.kernel must be rbf or linear");
          hp.svr.kernel = k == "rbf" ? KernelKind::rbf : KernelKind::linear;
        }
        if (s.contains("gamma")) {
          hp.svr.gamma = s["gamma"].is_null() ? std::nullopt
                                              : std::optional<double>(s["gamma"].template get<double>());
        }
        if (s.contains("tol")) hp.svr.tol = s["tol"].template get<double>();
        if (s.contains("max_iter")) hp.svr.max_iter = s["max_iter"].template get<long>();
      });
    }
  });
  hp.validate();
}

}  // namespace soilph
