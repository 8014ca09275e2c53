#include "soilph/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <optional>

#include <fmt/format.h>

#include "soilph/csv.hpp"
#include "soilph/error.hpp"
#include "soilph/parallel.hpp"
#include "soilph/spatial_index.hpp"
#include "soilph/version.hpp"

namespace soilph {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

FeatureSpec spec_of(const std::string& text, Encoding enc) { return FeatureSpec::parse(text, enc); }

std::string r_str(double r) { return format_radius(r); }

void config_error(const std::string& what) { throw_usage("config", what); }

std::string metric_text(double v, int digits) {
  return std::isnan(v) ? std::string("nan") : fmt::format("{:.{}f}", v, digits);
}

std::string metric_csv(double v) { return std::isnan(v) ? std::string("nan") : csv::format_double(v); }

}  // namespace

void ExperimentConfig::set_seed(std::uint64_t seed) {
  protocol.seed = seed;
  hp.forest.seed = seed;
}

void ExperimentConfig::validate() const {
  if (radii.empty()) config_error("radii must not be empty");
  for (double r : radii) {
    if (!(r > 0.0) || !std::isfinite(r)) config_error("radii must be positive");
  }
  if (!std::is_sorted(radii.begin(), radii.end()) ||
      std::adjacent_find(radii.begin(), radii.end()) != radii.end()) {
    config_error("radii must be strictly ascending");
  }
  auto has = [&](double r) { return std::find(radii.begin(), radii.end(), r) != radii.end(); };
  if (designs.find('B') != std::string::npos && !has(ablation_radius)) {
    config_error("ablation_radius " + r_str(ablation_radius) + " is not in radii");
  }
  if (designs.find('C') != std::string::npos && !has(stack_start_radius)) {
    config_error("stack_start_radius " + r_str(stack_start_radius) + " is not in radii");
  }
  for (char d : designs) {
    if (d != 'A' && d != 'B' && d != 'C') config_error(std::string("unknown design '") + d + "'");
  }
  if (designs.empty()) config_error("no designs selected");
  if (models.empty() && designs.find('A') != std::string::npos) config_error("no models for design A");
  if (ablation_models.empty() && designs.find_first_of("BC") != std::string::npos) {
    config_error("no models for designs B/C");
  }
  protocol.validate();
  hp.validate();
}

ExperimentConfig ExperimentConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) config_error("config must be a JSON object");
  static const std::vector<std::string> known = {
      "dataset", "radii", "models", "ablation_models", "ablation_radius", "stack_start_radius",
      "designs", "encoding", "protocol", "seed", "hyperparameters", "workers"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      config_error("unknown key '" + it.key() + "'");
    }
  }
  ExperimentConfig cfg;
  try {
    if (j.contains("dataset")) {
      std::filesystem::path p = j["dataset"].get<std::string>();
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      cfg.dataset_path = p.string();
    }
    if (j.contains("radii")) cfg.radii = j["radii"].get<std::vector<double>>();
    auto kinds = [](const json& arr) {
      std::vector<ModelKind> out;
      for (const auto& s : arr) out.push_back(model_kind_from_string(s.get<std::string>()));
      return out;
    };
    if (j.contains("models")) cfg.models = kinds(j["models"]);
    if (j.contains("ablation_models")) cfg.ablation_models = kinds(j["ablation_models"]);
    if (j.contains("ablation_radius")) cfg.ablation_radius = j["ablation_radius"].get<double>();
    if (j.contains("stack_start_radius")) cfg.stack_start_radius = j["stack_start_radius"].get<double>();
    if (j.contains("designs")) cfg.designs = j["designs"].get<std::string>();
    if (j.contains("encoding")) cfg.encoding = encoding_from_string(j["encoding"].get<std::string>());
    if (j.contains("hyperparameters")) cfg.hp = j["hyperparameters"].get<Hyperparameters>();
    if (j.contains("protocol")) {
      const auto& p = j["protocol"];
      if (!p.is_object()) config_error("protocol must be an object");
      for (auto it = p.begin(); it != p.end(); ++it) {
        if (it.key() != "type" && it.key() != "k" && it.key() != "test_fraction") {
          config_error("unknown protocol key '" + it.key() + "'");
        }
      }
      auto type = p.value("type", std::string("kfold"));
      if (type == "kfold") {
        cfg.protocol.kind = Protocol::Kind::kfold;
      } else if (type == "holdout") {
        cfg.protocol.kind = Protocol::Kind::holdout;
      } else {
        config_error("protocol.type must be kfold or holdout");
      }
      if (p.contains("k")) cfg.protocol.k = p["k"].get<std::size_t>();
      if (p.contains("test_fraction")) cfg.protocol.test_fraction = p["test_fraction"].get<double>();
    }
    if (!j.contains("seed")) config_error("seed is mandatory");
    cfg.set_seed(j["seed"].get<std::uint64_t>());
    if (j.contains("workers")) cfg.workers = j["workers"].get<std::size_t>();
  } catch (const json::exception& e) {
    config_error(e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_usage("config", "cannot open config '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    config_error(std::string("invalid JSON: ") + e.what());
  }
  return from_json(j, path.parent_path());
}

json ExperimentConfig::to_json() const {
  auto names = [](const std::vector<ModelKind>& v) {
    std::vector<std::string> out;
    for (auto k : v) out.emplace_back(soilph::to_string(k));
    return out;
  };
  json protocol_json = protocol.kind == Protocol::Kind::kfold
                           ? json{{"type", "kfold"}, {"k", protocol.k}}
                           : json{{"type", "holdout"}, {"test_fraction", protocol.test_fraction}};
  return {{"dataset", dataset_path},
          {"radii", radii},
          {"models", names(models)},
          {"ablation_models", names(ablation_models)},
          {"ablation_radius", ablation_radius},
          {"stack_start_radius", stack_start_radius},
          {"designs", designs},
          {"encoding", std::string(soilph::to_string(encoding))},
          {"protocol", protocol_json},
          {"seed", seed()},
          {"hyperparameters", hp}};
}

std::vector<ExperimentCell> plan_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<ExperimentCell> cells;
  const auto enc = cfg.encoding;
  if (cfg.designs.find('A') != std::string::npos) {
    cells.push_back({'A', "llcn", spec_of("long,lat,crop_name", enc), cfg.models});
    for (double r : cfg.radii) {
      auto s = r_str(r);
      cells.push_back({'A', "r" + s, spec_of(fmt::format("crop_name,min:{0},max:{0},avg:{0}", s), enc),
                       cfg.models});
    }
  }
  if (cfg.designs.find('B') != std::string::npos) {
    auto s = r_str(cfg.ablation_radius);
    const std::vector<std::string> ladder = {
        "long,lat,crop_name,require:{0}",
        "long,lat,crop_name,avg:{0}",
        "nb:{0},dist:{0},avg:{0},crop_name",
        "nb:{0},dist:{0},avg:{0},crop_type",
        "nb:{0},dist:{0},max:{0},min:{0},avg:{0}",
        "nb:{0},dist:{0},max:{0},min:{0},avg:{0},crop_name",
        "nb:{0},dist:{0},max:{0},min:{0},avg:{0},crop_name,crop_type",
    };
    for (const auto& tmpl : ladder) {
      auto spec = spec_of(fmt::format(fmt::runtime(tmpl), s), enc);
      cells.push_back({'B', spec.label(), spec, cfg.ablation_models});
    }
  }
  if (cfg.designs.find('C') != std::string::npos) {
    auto start = r_str(cfg.stack_start_radius);
    std::string text = "long,lat,crop_name,require:" + start;
    auto base = spec_of(text, enc);
    cells.push_back({'C', "Long/Lat/CropName", base, cfg.ablation_models});
    for (double r : cfg.radii) {
      if (r < cfg.stack_start_radius) continue;
      auto s = r_str(r);
      text += fmt::format(",nb:{0},dist:{0},avg:{0}", s);
      cells.push_back({'C', "+ Nb/Dist/Avg" + s, spec_of(text, enc), cfg.ablation_models});
    }
  }
  return cells;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.dataset_path.empty()) config_error("config has no dataset path");
  auto parsed = read_field_csv(cfg.dataset_path);
  return run_experiment(cfg, parsed.dataset);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const FieldDataset& ds) {
  auto start = Clock::now();
  auto cells = plan_experiment(cfg);
  const std::size_t workers = cfg.workers ? cfg.workers : default_workers();

  double max_radius = cfg.radii.back();
  max_radius = std::max({max_radius, cfg.ablation_radius, cfg.stack_start_radius});
  auto idx = SpatialIndex::build(ds, max_radius);

  ExperimentReport report;
  report.config = cfg;
  report.dataset_size = ds.size();
  report.neighbor_summary = neighbor_summary_table(ds, idx, cfg.radii, workers);

  // Design matrices, one per distinct spec, in plan order.
  std::vector<DesignMatrix> matrices;
  std::vector<std::size_t> matrix_of_cell;
  std::map<std::string, std::size_t> by_spec;
  for (const auto& cell : cells) {
    auto key = cell.spec.to_string();
    auto it = by_spec.find(key);
    if (it == by_spec.end()) {
      try {
        matrices.push_back(build_design_matrix(ds, idx, cell.spec, workers));
      } catch (const Error& e) {
        throw Error(e.kind(), e.code(),
                    fmt::format("design {} '{}': {}", cell.design, cell.label, e.what()));
      }
      it = by_spec.emplace(key, matrices.size() - 1).first;
    }
    matrix_of_cell.push_back(it->second);
  }

  struct Job {
    std::size_t cell;
    ModelKind model;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (auto m : cells[c].models) jobs.push_back({c, m});
  }
  report.rows.resize(jobs.size());
  parallel_for(jobs.size(), workers, [&](std::size_t j) {
    const auto& job = jobs[j];
    const auto& cell = cells[job.cell];
    const auto& dm = matrices[matrix_of_cell[job.cell]];
    auto t0 = Clock::now();
    ModelSpec spec{job.model, cfg.hp};
    CvResult cv;
    try {
      cv = evaluate_protocol(dm, spec, cfg.protocol, 1);
    } catch (const Error& e) {
      throw Error(e.kind(), e.code(),
                  fmt::format("design {} '{}' model {}: {}", cell.design, cell.label,
                              to_string(job.model), e.what()));
    }
    auto& row = report.rows[j];
    row.design = cell.design;
    row.label = cell.label;
    row.features = cell.spec.to_string();
    row.model = job.model;
    row.metrics = cv.aggregate;
    row.folds = cv.folds;
    row.rows = static_cast<std::size_t>(dm.rows());
    row.cols = static_cast<std::size_t>(dm.cols());
    row.blocks = cell.spec.blocks.size();
    // Convergence of the solver on the full design is what users care about;
    // approximate it with a refit only for iterative kinds.
    if (job.model == ModelKind::LASSO || job.model == ModelKind::SVR) {
      row.converged = fit_model(spec, dm.x, dm.y, dm.column_names).converged();
    }
    row.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  });
  report.total_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return report;
}

void write_report_csv(std::ostream& out, const ExperimentReport& report) {
  out << "design,label,features,model,r2,mae,rows,cols,blocks,converged\n";
  for (const auto& r : report.rows) {
    out << r.design << ',' << csv::quote(r.label) << ',' << csv::quote(r.features) << ','
        << to_string(r.model) << ',' << metric_csv(r.metrics.r2) << ',' << metric_csv(r.metrics.mae)
        << ',' << r.rows << ',' << r.cols << ',' << r.blocks << ',' << (r.converged ? 1 : 0) << '\n';
  }
}

void write_folds_csv(std::ostream& out, const ExperimentReport& report) {
  out << "design,label,model,fold,r2,mae\n";
  for (const auto& r : report.rows) {
    for (std::size_t f = 0; f < r.folds.size(); ++f) {
      out << r.design << ',' << csv::quote(r.label) << ',' << to_string(r.model) << ',' << f << ','
          << metric_csv(r.folds[f].r2) << ',' << metric_csv(r.folds[f].mae) << '\n';
    }
  }
}

void write_timing_csv(std::ostream& out, const ExperimentReport& report) {
  out << "design,label,model,seconds\n";
  for (const auto& r : report.rows) {
    out << r.design << ',' << csv::quote(r.label) << ',' << to_string(r.model) << ','
        << fmt::format("{:.6f}", r.seconds) << '\n';
  }
}

void write_report_text(std::ostream& out, const ExperimentReport& report) {
  const auto& cfg = report.config;
  out << fmt::format("Dataset: {} fields; protocol {}; encoding {}\n\n", report.dataset_size,
                     cfg.protocol.describe(), to_string(cfg.encoding));
  out << "Fields with neighbors by radius\n";
  write_summary_text(out, report.neighbor_summary);

  auto rows_of = [&](char design) {
    std::vector<const ReportRow*> v;
    for (const auto& r : report.rows) {
      if (r.design == design) v.push_back(&r);
    }
    return v;
  };
  // Distinct labels and models in first-seen order.
  auto layout = [](const std::vector<const ReportRow*>& v) {
    std::vector<std::string> labels;
    std::vector<ModelKind> models;
    for (const auto* r : v) {
      if (std::find(labels.begin(), labels.end(), r->label) == labels.end()) labels.push_back(r->label);
      if (std::find(models.begin(), models.end(), r->model) == models.end()) models.push_back(r->model);
    }
    return std::pair{labels, models};
  };
  auto find = [](const std::vector<const ReportRow*>& v, const std::string& label, ModelKind m) {
    for (const auto* r : v) {
      if (r->label == label && r->model == m) return r;
    }
    return static_cast<const ReportRow*>(nullptr);
  };

  if (auto a = rows_of('A'); !a.empty()) {
    auto [labels, models] = layout(a);
    out << "\nDesign A: radius-based features (R2 / MAE)\n";
    out << fmt::format("{:<8} {:>12}", "Attr.", "Size");
    for (auto m : models) out << fmt::format(" {:>15}", to_string(m));
    out << '\n';
    for (const auto& label : labels) {
      const auto* first = find(a, label, models.front());
      out << fmt::format("{:<8} {:>12}", label, fmt::format("({}, {})", first->rows, first->blocks));
      for (auto m : models) {
        const auto* r = find(a, label, m);
        out << fmt::format(" {:>15}", metric_text(r->metrics.r2, 3) + " / " + metric_text(r->metrics.mae, 2));
      }
      out << '\n';
    }
  }
  for (char design : {'B', 'C'}) {
    auto v = rows_of(design);
    if (v.empty()) continue;
    auto [labels, models] = layout(v);
    out << (design == 'B' ? "\nDesign B: individual features at radius " + r_str(cfg.ablation_radius) + " (R2)\n"
                          : "\nDesign C: combined features (R2)\n");
    std::size_t width = 8;
    for (const auto& l : labels) width = std::max(width, l.size());
    out << fmt::format("{:<{}} {:>12}", "Feature", width, "Size");
    for (auto m : models) out << fmt::format(" {:>8}", to_string(m));
    out << '\n';
    for (const auto& label : labels) {
      const auto* first = find(v, label, models.front());
      out << fmt::format("{:<{}} {:>12}", label, width, fmt::format("({}, {})", first->rows, first->blocks));
      for (auto m : models) out << fmt::format(" {:>8}", metric_text(find(v, label, m)->metrics.r2, 3));
      out << '\n';
    }
  }
}

json report_metadata(const ExperimentReport& report) {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return {{"tool", "soilph"},
          {"version", kVersion},
          {"model_format_version", kModelFormatVersion},
          {"seed", report.config.seed()},
          {"protocol", report.config.protocol.describe()},
          {"dataset_size", report.dataset_size},
          {"workers", report.config.workers ? report.config.workers : default_workers()},
          {"total_seconds", report.total_seconds},
          {"written_at", stamp},
          {"config", report.config.to_json()}};
}

void write_report_files(const std::filesystem::path& dir, const ExperimentReport& report) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw_runtime("io", "cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("report.csv");
    write_report_csv(f, report);
  }
  {
    auto f = open("folds.csv");
    write_folds_csv(f, report);
  }
  {
    auto f = open("tables.txt");
    write_report_text(f, report);
  }
  {
    auto f = open("neighbor_summary.csv");
    write_summary_csv(f, report.neighbor_summary);
  }
  {
    auto f = open("timing.csv");
    write_timing_csv(f, report);
  }
  {
    auto f = open("metadata.json");
    f << report_metadata(report).dump(2) << '\n';
  }
}

}  // namespace soilph
