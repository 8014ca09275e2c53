#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "soilph/csv.hpp"
#include "soilph/data_ingest.hpp"
#include "soilph/error.hpp"
#include "soilph/experiment.hpp"
#include "soilph/feature_builder.hpp"
#include "soilph/model_bundle.hpp"
#include "soilph/parallel.hpp"
#include "soilph/spatial_index.hpp"
#include "soilph/synth.hpp"
#include "soilph/version.hpp"

namespace soilph::cli {

namespace {

const char* const kDefaultRadii = "100,200,300,400,500,750,1000,1500,2000";

struct DataOptions {
  std::string path;
  std::string columns;
  std::string mapping;
};

void add_data_options(CLI::App& cmd, DataOptions& d, bool required = true) {
  auto* opt = cmd.add_option("--data", d.path, "Field CSV (canonical columns unless --columns remaps them)");
  if (required) opt->required();
  cmd.add_option("--columns", d.columns, "Header remapping, e.g. \"field_id=FieldID,ph=pH\"");
  cmd.add_option("--mapping", d.mapping, "Crop-name to crop-type mapping file (default: bundled)");
}

ParseResult load_data(const DataOptions& d, std::ostream& err) {
  auto schema = d.columns.empty() ? ColumnSchema{} : ColumnSchema::parse(d.columns);
  auto mapping = d.mapping.empty() ? CropMapping::bundled() : CropMapping::load(d.mapping);
  auto parsed = read_field_csv(d.path, schema, mapping);
  if (parsed.report.rejected_count > 0) {
    err << fmt::format("{}: {} row(s) rejected, {} accepted\n", d.path, parsed.report.rejected_count,
                       parsed.report.accepted_count);
  }
  return parsed;
}

std::vector<double> parse_radii(const std::string& text) {
  std::vector<double> out;
  for (const auto& cell : csv::split_list(text, ',')) {
    auto v = csv::parse_double(cell);
    if (!v) throw_usage("radii", "'" + cell + "' is not a number");
    if (!(*v > 0.0)) throw_usage("radius_range", "radius must be > 0 m, got '" + cell + "'");
    out.push_back(*v);
  }
  if (out.empty()) throw_usage("radii", "empty radius list");
  if (!std::is_sorted(out.begin(), out.end())) throw_usage("radius_order", "radii must be ascending");
  return out;
}

// Raw columns a feature spec reads from the CSV, checked against the header.
void require_columns(const FeatureSpec& spec, const ParseResult& parsed, bool need_target) {
  bool ph = need_target || !spec.row_filter_radii.empty();
  bool crop = false;
  for (const auto& b : spec.blocks) {
    ph = ph || is_radius_block(b.kind);
    crop = crop || is_categorical_block(b.kind);
  }
  auto check = [&](std::string_view name) {
    if (!parsed.present_columns.contains(name)) {
      throw_data("schema_mismatch", fmt::format("missing column '{}'", name));
    }
  };
  if (ph) check(column::ph);
  if (crop) check(column::crop_name);
}

double index_radius(const FeatureSpec& spec) {
  auto r = spec.radii();
  return r.empty() ? 1.0 : r.back();
}

Hyperparameters parse_params(const std::string& text) {
  if (text.empty()) return {};
  nlohmann::json j;
  try {
    if (std::filesystem::exists(text)) {
      std::ifstream in(text);
      in >> j;
    } else {
      j = nlohmann::json::parse(text);
    }
  } catch (const nlohmann::json::exception& e) {
    throw_usage("hyperparameter", std::string("invalid --params JSON: ") + e.what());
  }
  try {
    return j.get<Hyperparameters>();
  } catch (const nlohmann::json::exception& e) {
    throw_usage("hyperparameter", e.what());
  }
}

std::size_t resolve_workers(std::size_t w) { return w ? w : default_workers(); }

// Writes to a file or, for "-" / empty, to `out`.
template <class Fn>
void with_output(const std::string& path, std::ostream& out, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(out);
    return;
  }
  std::ofstream f(path);
  if (!f) throw_runtime("io", "cannot write '" + path + "'");
  fn(f);
  if (!f) throw_runtime("io", "write failed for '" + path + "'");
}

int map_error(const Error& e, std::ostream& err) {
  err << "error: " << e.what() << '\n';
  switch (e.kind()) {
    case ErrorKind::usage: return kExitUsage;
    case ErrorKind::data: return kExitData;
    case ErrorKind::runtime: return kExitRuntime;
  }
  return kExitRuntime;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Soil pH prediction from neighbouring fields", "soilph"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  std::size_t workers = 0;
  const std::string workers_help = "Worker threads (0 = SOILPH_WORKERS or hardware concurrency)";

  // validate
  DataOptions v_data;
  auto* validate = app.add_subcommand("validate", "Parse a field CSV and list rejected rows");
  add_data_options(*validate, v_data);

  // stats
  DataOptions s_data;
  std::string s_radii = kDefaultRadii;
  std::string s_csv;
  auto* stats = app.add_subcommand("stats", "Neighbor summary per radius");
  add_data_options(*stats, s_data);
  stats->add_option("--radii", s_radii, "Ascending radii in metres")->capture_default_str();
  stats->add_option("--csv", s_csv, "Also write the table as CSV to this path");
  stats->add_option("--workers", workers, workers_help)->capture_default_str();

  // features
  DataOptions f_data;
  std::string f_spec;
  std::string f_encoding = "one-hot";
  std::string f_out;
  auto* features = app.add_subcommand("features", "Export the design matrix for a feature spec");
  add_data_options(*features, f_data);
  features->add_option("--features", f_spec, "Feature spec, e.g. \"crop_name,min:400,max:400,avg:400\"")
      ->required();
  features->add_option("--encoding", f_encoding, "one-hot or ordinal")->capture_default_str();
  features->add_option("--out", f_out, "Output CSV (default stdout)");
  features->add_option("--workers", workers, workers_help)->capture_default_str();

  // train / evaluate share the model options
  DataOptions t_data;
  std::string t_spec;
  std::string t_encoding = "one-hot";
  std::string t_type = "lr";
  std::string t_params;
  std::uint64_t t_seed = 42;
  std::string t_model;
  auto* train = app.add_subcommand("train", "Fit one model and write a model file");
  add_data_options(*train, t_data);
  train->add_option("--features", t_spec, "Feature spec")->required();
  train->add_option("--encoding", t_encoding, "one-hot or ordinal")->capture_default_str();
  train->add_option("--type", t_type, "lr, lasso, dtr, rf, gbrt or svr")->capture_default_str();
  train->add_option("--params", t_params, "Hyperparameters as JSON text or a JSON file");
  train->add_option("--seed", t_seed, "Random seed (forest bootstrap)")->capture_default_str();
  train->add_option("--model", t_model, "Output model file")->required();
  train->add_option("--workers", workers, workers_help)->capture_default_str();

  DataOptions e_data;
  std::string e_spec;
  std::string e_encoding = "one-hot";
  std::string e_type = "lr";
  std::string e_params;
  std::uint64_t e_seed = 42;
  std::string e_protocol = "kfold";
  std::size_t e_k = 5;
  double e_fraction = 0.2;
  auto* evaluate = app.add_subcommand("evaluate", "Cross-validate one model on one feature spec");
  add_data_options(*evaluate, e_data);
  evaluate->add_option("--features", e_spec, "Feature spec")->required();
  evaluate->add_option("--encoding", e_encoding, "one-hot or ordinal")->capture_default_str();
  evaluate->add_option("--type", e_type, "lr, lasso, dtr, rf, gbrt or svr")->capture_default_str();
  evaluate->add_option("--params", e_params, "Hyperparameters as JSON text or a JSON file");
  evaluate->add_option("--protocol", e_protocol, "kfold or holdout")->capture_default_str();
  evaluate->add_option("--k", e_k, "Number of folds")->capture_default_str();
  evaluate->add_option("--test-fraction", e_fraction, "Holdout test fraction")->capture_default_str();
  evaluate->add_option("--seed", e_seed, "Seed for fold assignment and forest bootstrap")
      ->capture_default_str();
  evaluate->add_option("--workers", workers, workers_help)->capture_default_str();

  // experiment
  std::string x_config;
  std::string x_out;
  std::string x_data;
  std::string x_models;
  std::optional<std::uint64_t> x_seed;
  auto* experiment = app.add_subcommand("experiment", "Run designs A/B/C from a JSON config");
  experiment->add_option("--config", x_config, "Experiment config (JSON)")->required();
  experiment->add_option("--out", x_out, "Report directory")->required();
  experiment->add_option("--data", x_data, "Override the config's dataset path");
  experiment->add_option("--models", x_models, "Restrict every design to these models, e.g. lr,svr,gbrt");
  experiment->add_option("--seed", x_seed, "Override the config seed");
  experiment->add_option("--workers", workers, workers_help)->capture_default_str();

  // predict
  DataOptions p_data;
  std::string p_model;
  std::string p_out;
  auto* predict = app.add_subcommand("predict", "Predict pH with a model file");
  predict->add_option("--model", p_model, "Model file written by train")->required();
  add_data_options(*predict, p_data);
  predict->add_option("--out", p_out, "Output CSV (default stdout)");
  predict->add_option("--workers", workers, workers_help)->capture_default_str();

  // synth
  SynthConfig syn;
  syn.n_fields = 1000;
  double syn_density = kDefaultFieldDensity;
  std::string syn_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic field CSV");
  synth->add_option("--n-fields", syn.n_fields, "Number of fields")->capture_default_str();
  synth->add_option("--density", syn_density, "Fields per square kilometre")->capture_default_str();
  synth->add_option("--correlation-length", syn.correlation_length_m, "Surface correlation length (m)")
      ->capture_default_str();
  synth->add_option("--ph-base", syn.ph_base, "Mean pH")->capture_default_str();
  synth->add_option("--amplitude", syn.ph_amplitude, "Surface amplitude (pH units)")->capture_default_str();
  synth->add_option("--noise-sd", syn.noise_sd, "Per-field noise sd (pH units)")->capture_default_str();
  synth->add_option("--seed", syn.seed, "Random seed")->capture_default_str();
  synth->add_option("--out", syn_out, "Output CSV (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*validate) {
      auto parsed = load_data(v_data, err);
      const auto& r = parsed.report;
      out << fmt::format("accepted {}\nrejected {}\n", r.accepted_count, r.rejected_count);
      for (const auto& rej : r.rejections) out << fmt::format("row {}: {}\n", rej.row, rej.reason);
      return r.rejected_count == 0 ? kExitOk : kExitData;
    }
    if (*stats) {
      auto radii = parse_radii(s_radii);
      auto parsed = load_data(s_data, err);
      auto idx = SpatialIndex::build(parsed.dataset, radii.back());
      auto table = neighbor_summary_table(parsed.dataset, idx, radii, resolve_workers(workers));
      write_summary_text(out, table);
      if (!s_csv.empty()) with_output(s_csv, out, [&](std::ostream& o) { write_summary_csv(o, table); });
      return kExitOk;
    }
    if (*features) {
      auto spec = FeatureSpec::parse(f_spec, encoding_from_string(f_encoding));
      auto parsed = load_data(f_data, err);
      require_columns(spec, parsed, true);
      auto idx = SpatialIndex::build(parsed.dataset, index_radius(spec));
      auto dm = build_design_matrix(parsed.dataset, idx, spec, resolve_workers(workers));
      with_output(f_out, out, [&](std::ostream& o) { write_design_csv(o, dm); });
      return kExitOk;
    }
    if (*train) {
      auto spec = FeatureSpec::parse(t_spec, encoding_from_string(t_encoding));
      ModelSpec ms{model_kind_from_string(t_type), parse_params(t_params)};
      ms.hp.forest.seed = t_seed;
      ms.hp.validate();
      auto parsed = load_data(t_data, err);
      require_columns(spec, parsed, true);
      auto idx = SpatialIndex::build(parsed.dataset, index_radius(spec));
      auto dm = build_design_matrix(parsed.dataset, idx, spec, resolve_workers(workers));
      auto bundle = train_bundle(dm, spec, ms, resolve_workers(workers));
      bundle.save(t_model);
      err << fmt::format("trained {} on {} rows x {} columns{}\n", to_string(ms.kind), dm.rows(), dm.cols(),
                         bundle.model.converged() ? "" : " (solver hit max_iter)");
      return kExitOk;
    }
    if (*evaluate) {
      auto spec = FeatureSpec::parse(e_spec, encoding_from_string(e_encoding));
      ModelSpec ms{model_kind_from_string(e_type), parse_params(e_params)};
      ms.hp.forest.seed = e_seed;
      ms.hp.validate();
      Protocol protocol;
      if (e_protocol == "kfold") {
        protocol.kind = Protocol::Kind::kfold;
      } else if (e_protocol == "holdout") {
        protocol.kind = Protocol::Kind::holdout;
      } else {
        throw_usage("protocol", "--protocol must be kfold or holdout");
      }
      protocol.k = e_k;
      protocol.test_fraction = e_fraction;
      protocol.seed = e_seed;
      protocol.validate();
      auto parsed = load_data(e_data, err);
      require_columns(spec, parsed, true);
      auto idx = SpatialIndex::build(parsed.dataset, index_radius(spec));
      auto dm = build_design_matrix(parsed.dataset, idx, spec, resolve_workers(workers));
      auto cv = evaluate_protocol(dm, ms, protocol, resolve_workers(workers));
      auto num = [](double v) { return std::isnan(v) ? std::string("nan") : csv::format_double(v); };
      out << "fold,r2,mae\n";
      for (std::size_t f = 0; f < cv.folds.size(); ++f) {
        out << f << ',' << num(cv.folds[f].r2) << ',' << num(cv.folds[f].mae) << '\n';
      }
      out << "mean," << num(cv.aggregate.r2) << ',' << num(cv.aggregate.mae) << '\n';
      return kExitOk;
    }
    if (*experiment) {
      auto cfg = ExperimentConfig::load(x_config);
      if (!x_data.empty()) cfg.dataset_path = x_data;
      if (x_seed) cfg.set_seed(*x_seed);
      if (!x_models.empty()) {
        auto models = parse_model_list(x_models);
        cfg.models = models;
        cfg.ablation_models = models;
      }
      if (workers) cfg.workers = workers;
      cfg.validate();
      auto report = run_experiment(cfg);
      write_report_files(x_out, report);
      write_report_text(out, report);
      return kExitOk;
    }
    if (*predict) {
      auto bundle = ModelBundle::load(p_model);
      auto parsed = load_data(p_data, err);
      require_columns(bundle.spec, parsed, false);
      auto pred = predict_bundle(bundle, parsed.dataset, resolve_workers(workers));
      with_output(p_out, out, [&](std::ostream& o) {
        o << "field_id,predicted_ph\n";
        for (std::size_t i = 0; i < pred.row_fields.size(); ++i) {
          o << csv::quote(parsed.dataset.records[pred.row_fields[i]].field_id) << ','
            << csv::format_double(pred.predicted(static_cast<Eigen::Index>(i))) << '\n';
        }
      });
      auto skipped = parsed.dataset.size() - pred.row_fields.size();
      if (skipped > 0) err << fmt::format("{} field(s) lack neighbors at the model's radii\n", skipped);
      if (pred.unseen_categories > 0) {
        err << fmt::format("{} unseen categorical value(s) encoded as unknown\n", pred.unseen_categories);
      }
      return kExitOk;
    }
    if (*synth) {
      auto cfg = SynthConfig::with_density(syn.n_fields, syn_density);
      cfg.correlation_length_m = syn.correlation_length_m;
      cfg.ph_base = syn.ph_base;
      cfg.ph_amplitude = syn.ph_amplitude;
      cfg.noise_sd = syn.noise_sd;
      cfg.seed = syn.seed;
      cfg.validate();
      auto ds = generate_synthetic_fields(cfg);
      with_output(syn_out, out, [&](std::ostream& o) { write_field_csv(o, ds); });
      return kExitOk;
    }
  } catch (const Error& e) {
    return map_error(e, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace soilph::cli
