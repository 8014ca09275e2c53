#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "soilph/cross_validation.hpp"
#include "soilph/data_ingest.hpp"
#include "soilph/feature_builder.hpp"
#include "soilph/feature_spec.hpp"
#include "soilph/regressors/hyperparameters.hpp"

namespace soilph {

// Experiment designs:
//   A  per-radius CropName+Min/Max/Avg(r), plus the Long/Lat/CropName baseline
//   B  feature ablation ladder at a single radius
//   C  cumulative Nb/Dist/Avg stacking over increasing radii on the fixed row
//      set of fields that have neighbors at the smallest stacked radius
struct ExperimentConfig {
  std::string dataset_path;
  std::vector<double> radii = {100, 200, 300, 400, 500, 750, 1000, 1500, 2000};
  std::vector<ModelKind> models = all_model_kinds();
  std::vector<ModelKind> ablation_models = {ModelKind::LR, ModelKind::SVR, ModelKind::GBRT};
  double ablation_radius = 400;
  double stack_start_radius = 200;
  std::string designs = "ABC";
  Encoding encoding = Encoding::one_hot;
  Protocol protocol;
  Hyperparameters hp;
  std::size_t workers = 0;  // 0 = default_workers()

  // Sets the protocol seed and the forest bootstrap seed.
  void set_seed(std::uint64_t seed);
  std::uint64_t seed() const { return protocol.seed; }

  // Throws Error{usage, "config"} (or a more specific usage code).
  void validate() const;

  // Relative dataset paths are resolved against `base_dir`.
  static ExperimentConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static ExperimentConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

struct ExperimentCell {
  char design;
  std::string label;
  FeatureSpec spec;
  std::vector<ModelKind> models;
};

// Ordered (design, feature spec, models) list the runner evaluates.
std::vector<ExperimentCell> plan_experiment(const ExperimentConfig& cfg);

struct ReportRow {
  char design;
  std::string label;
  std::string features;  // FeatureSpec::to_string()
  ModelKind model;
  MetricPair metrics;
  std::vector<MetricPair> folds;
  std::size_t rows = 0;
  std::size_t cols = 0;    // after categorical expansion
  std::size_t blocks = 0;  // feature blocks before expansion
  bool converged = true;
  double seconds = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::size_t dataset_size = 0;
  std::vector<NeighborSummaryRow> neighbor_summary;
  std::vector<ReportRow> rows;
  double total_seconds = 0.0;
};

ExperimentReport run_experiment(const ExperimentConfig& cfg);
ExperimentReport run_experiment(const ExperimentConfig& cfg, const FieldDataset& ds);

// Deterministic outputs (no timings).
void write_report_csv(std::ostream& out, const ExperimentReport& report);
void write_folds_csv(std::ostream& out, const ExperimentReport& report);
void write_report_text(std::ostream& out, const ExperimentReport& report);
// Wall-clock data, kept apart from the deterministic files.
void write_timing_csv(std::ostream& out, const ExperimentReport& report);
nlohmann::json report_metadata(const ExperimentReport& report);

// report.csv, folds.csv, tables.txt, neighbor_summary.csv (deterministic)
// and timing.csv, metadata.json.
void write_report_files(const std::filesystem::path& dir, const ExperimentReport& report);

}  // namespace soilph
