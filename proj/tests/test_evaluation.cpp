#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "soilph/cross_validation.hpp"
#include "soilph/error.hpp"
#include "soilph/experiment.hpp"
#include "soilph/metrics.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace soilph;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

DesignMatrix linear_design(std::size_t n, double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  DesignMatrix dm;
  dm.x.resize(static_cast<Eigen::Index>(n), 2);
  dm.y.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < dm.x.rows(); ++i) {
    dm.x(i, 0) = g(rng);
    dm.x(i, 1) = g(rng);
    dm.y(i) = 1.5 * dm.x(i, 0) - 2.0 * dm.x(i, 1) + 3.0 + noise * g(rng);
  }
  dm.column_names = {"a", "b"};
  return dm;
}

}  // namespace

TEST(Metrics, HandDerivedExamples) {
  std::vector<double> y{1, 2, 3};
  EXPECT_NEAR(r2_score(y, std::vector<double>{1, 2, 4}), 0.5, 1e-12);
  EXPECT_NEAR(mae(y, std::vector<double>{2, 2, 2}), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(r2_score(y, y), 1.0);
  EXPECT_EQ(mae(y, y), 0.0);
  EXPECT_EQ(r2_score(y, std::vector<double>{2, 2, 2}), 0.0);
}

TEST(Metrics, ConstantPredictorScoresZero) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(6.5, 0.7);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> y(static_cast<std::size_t>(2 + t));
    for (auto& v : y) v = g(rng);
    double m = 0;
    for (double v : y) m += v;
    m /= static_cast<double>(y.size());
    std::vector<double> c(y.size(), m);
    EXPECT_NEAR(r2_score(y, c), 0.0, 1e-12);
  }
}

TEST(Metrics, ErrorsAndHomogeneity) {
  std::vector<double> y{1, 1, 1};
  try {
    r2_score(y, std::vector<double>{1, 2, 3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "degenerate_target");
  }
  EXPECT_THROW(mae(std::vector<double>{1, 2}, std::vector<double>{1}), Error);
  EXPECT_THROW(mae(std::vector<double>{}, std::vector<double>{}), Error);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0, 1);
  std::vector<double> a(50), b(50), b2(50);
  for (std::size_t i = 0; i < 50; ++i) {
    a[i] = g(rng);
    b[i] = g(rng);
    b2[i] = a[i] + 2 * (b[i] - a[i]);
  }
  EXPECT_NEAR(mae(a, b2), 2 * mae(a, b), 1e-12);
  EXPECT_NEAR(mae(a, b), oracle::mae(a, b), 1e-12);
  EXPECT_NEAR(r2_score(a, b), oracle::r2(a, b), 1e-12);
  EXPECT_LE(r2_score(a, b), 1.0);
}

TEST(Metrics, MeanSkipsUndefinedR2AndIsOrderFree) {
  std::vector<MetricPair> folds{{0.5, 0.1}, {std::nan(""), 0.3}, {0.7, 0.2}};
  auto m = mean_metrics(folds);
  EXPECT_DOUBLE_EQ(m.r2, 0.6);
  EXPECT_DOUBLE_EQ(m.mae, 0.2);
  std::vector<MetricPair> rev(folds.rbegin(), folds.rend());
  auto r = mean_metrics(rev);
  EXPECT_EQ(r.r2, m.r2);
  EXPECT_EQ(r.mae, m.mae);
}

TEST(KFold, LeaveOneOut) {
  auto a = kfold_assignment(5, 5, 42);
  std::vector<std::size_t> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  auto dm = linear_design(5, 0.1, 3);
  auto cv = kfold_cv(dm, {ModelKind::LR, {}}, 5, 42);
  EXPECT_EQ(cv.folds.size(), 5u);
  for (const auto& f : cv.folds) EXPECT_TRUE(std::isnan(f.r2));
  EXPECT_TRUE(std::isnan(cv.aggregate.r2));
  EXPECT_GE(cv.aggregate.mae, 0.0);
}

TEST(KFold, PartitionAndFoldSizes) {
  for (std::size_t n : {7u, 10u, 101u}) {
    for (std::size_t k : {2u, 3u, 5u}) {
      auto a = kfold_assignment(n, k, 9);
      std::vector<std::size_t> count(k, 0);
      for (auto f : a) ++count.at(f);
      auto [lo, hi] = std::minmax_element(count.begin(), count.end());
      EXPECT_LE(*hi - *lo, 1u);
      EXPECT_EQ(std::accumulate(count.begin(), count.end(), std::size_t{0}), n);
    }
  }
  EXPECT_THROW(kfold_assignment(4, 5, 1), Error);
  EXPECT_THROW(kfold_assignment(4, 1, 1), Error);
}

TEST(KFold, DeterministicPerSeed) {
  auto dm = linear_design(80, 0.5, 4);
  ModelSpec spec{ModelKind::GBRT, {}};
  auto a = kfold_cv(dm, spec, 5, 7);
  auto b = kfold_cv(dm, spec, 5, 7);
  EXPECT_EQ(a.fold_of_row, b.fold_of_row);
  for (std::size_t f = 0; f < 5; ++f) {
    EXPECT_EQ(a.folds[f].r2, b.folds[f].r2);
    EXPECT_EQ(a.folds[f].mae, b.folds[f].mae);
  }
  auto c = kfold_cv(dm, spec, 5, 8);
  EXPECT_NE(a.fold_of_row, c.fold_of_row);
  auto mean = mean_metrics(a.folds);
  EXPECT_EQ(mean.r2, a.aggregate.r2);
  EXPECT_EQ(mean.mae, a.aggregate.mae);
}

TEST(KFold, NoiselessLinearRecoveredExactly) {
  auto dm = linear_design(40, 0.0, 5);
  for (std::size_t k : {2u, 4u, 10u}) {
    auto cv = kfold_cv(dm, {ModelKind::LR, {}}, k, 11);
    EXPECT_NEAR(cv.aggregate.r2, 1.0, 1e-9);
    EXPECT_NEAR(cv.aggregate.mae, 0.0, 1e-9);
  }
}

TEST(Holdout, SplitAndProtocolValidation) {
  auto dm = linear_design(50, 0.1, 6);
  Protocol p;
  p.kind = Protocol::Kind::holdout;
  p.test_fraction = 0.2;
  auto r = evaluate_protocol(dm, {ModelKind::LR, {}}, p);
  ASSERT_EQ(r.folds.size(), 1u);
  EXPECT_EQ(std::count(r.fold_of_row.begin(), r.fold_of_row.end(), 0u), 10);
  EXPECT_GT(r.aggregate.r2, 0.9);
  p.test_fraction = 1.0;
  EXPECT_THROW(p.validate(), Error);
  Protocol q;
  q.k = 1;
  EXPECT_THROW(q.validate(), Error);
}

TEST(ExperimentConfig, DefaultsAndJson) {
  ExperimentConfig d;
  EXPECT_EQ(d.radii, (std::vector<double>{100, 200, 300, 400, 500, 750, 1000, 1500, 2000}));
  EXPECT_EQ(d.models.size(), 6u);
  EXPECT_EQ(d.protocol.k, 5u);
  EXPECT_EQ(d.seed(), 42u);
  auto cfg = ExperimentConfig::from_json(nlohmann::json::parse(
      R"({"dataset":"x.csv","seed":7,"protocol":{"type":"holdout","test_fraction":0.3},
          "models":["lr","gbrt"],"hyperparameters":{"gbrt":{"n_stages":5}}})"),
      "/data");
  EXPECT_EQ(cfg.dataset_path, "/data/x.csv");
  EXPECT_EQ(cfg.seed(), 7u);
  EXPECT_EQ(cfg.hp.forest.seed, 7u);
  EXPECT_EQ(cfg.protocol.kind, Protocol::Kind::holdout);
  EXPECT_EQ(cfg.hp.gbrt.n_stages, 5);
  auto again = ExperimentConfig::from_json(cfg.to_json());
  EXPECT_EQ(again.to_json(), cfg.to_json());
}

TEST(ExperimentConfig, SchemaErrors) {
  auto code = [](const char* text) {
    try {
      ExperimentConfig::from_json(nlohmann::json::parse(text));
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::usage);
      return e.code();
    }
    return std::string();
  };
  EXPECT_EQ(code(R"({"dataset":"x"})"), "config");  // seed is mandatory
  EXPECT_EQ(code(R"({"seed":1,"bogus":2})"), "config");
  EXPECT_EQ(code(R"({"seed":1,"radii":[200,100]})"), "config");
  EXPECT_EQ(code(R"({"seed":1,"radii":[100,300],"designs":"B"})"), "config");
  EXPECT_EQ(code(R"({"seed":1,"protocol":{"type":"kfold","k":1}})"), "protocol");
  EXPECT_EQ(code(R"({"seed":1,"models":["knn"]})"), "model_kind");
  EXPECT_EQ(code(R"({"seed":1,"radii":"100"})"), "config");
}

TEST(Experiment, PlanFollowsTableDesigns) {
  ExperimentConfig cfg;
  auto cells = plan_experiment(cfg);
  std::size_t a = 0, b = 0, c = 0;
  for (const auto& cell : cells) (cell.design == 'A' ? a : cell.design == 'B' ? b : c)++;
  EXPECT_EQ(a, 10u);  // baseline + 9 radii
  EXPECT_EQ(b, 7u);
  EXPECT_EQ(c, 9u);  // base + 200..2000
  EXPECT_EQ(cells[0].label, "llcn");
  EXPECT_EQ(cells[4].label, "r400");
  EXPECT_EQ(cells[4].spec.to_string(), FeatureSpec::parse("crop_name,min:400,max:400,avg:400").to_string());
  EXPECT_EQ(cells[10].label, "Long/Lat/CropName");
  EXPECT_EQ(cells[16].label, "Nb/Dist/Max/Min/Avg400+CropName/CropType");
  for (std::size_t i = 17; i < cells.size(); ++i) {
    EXPECT_EQ(cells[i].spec.row_filter_radii, (std::vector<double>{200}));
  }
  EXPECT_EQ(cells.back().spec.blocks.size(), 3u + 3u * 8u);
}

TEST(Experiment, SmallRunStructureAndDeterminism) {
  auto ds = fixtures::synth(500, 8);
  ExperimentConfig cfg;
  cfg.radii = {200, 400, 1000};
  cfg.models = {ModelKind::LR, ModelKind::LASSO, ModelKind::DTR};
  cfg.ablation_models = {ModelKind::LR};
  cfg.hp.forest.n_trees = 5;
  cfg.workers = 3;
  auto rep = run_experiment(cfg, ds);
  // A: (baseline + 3 radii) x 3 models; B: 7 x 1; C: (1 + 3) x 1
  EXPECT_EQ(rep.rows.size(), 4u * 3u + 7u + 4u);
  EXPECT_EQ(rep.neighbor_summary.size(), 3u);
  auto idx = SpatialIndex::build(ds, 1000);
  for (const auto& row : rep.rows) {
    auto dm = build_design_matrix(ds, idx, FeatureSpec::parse(row.features));
    EXPECT_EQ(row.rows, static_cast<std::size_t>(dm.rows())) << row.label;
    EXPECT_EQ(row.cols, static_cast<std::size_t>(dm.cols())) << row.label;
    EXPECT_EQ(row.folds.size(), 5u);
    auto m = mean_metrics(row.folds);
    EXPECT_EQ(m.r2, row.metrics.r2);
    EXPECT_EQ(m.mae, row.metrics.mae);
  }
  std::set<std::size_t> c_rows;
  for (const auto& row : rep.rows) {
    if (row.design == 'C') c_rows.insert(row.rows);
  }
  EXPECT_EQ(c_rows.size(), 1u);

  cfg.workers = 1;
  auto again = run_experiment(cfg, ds);
  std::ostringstream a, b, ta, tb;
  write_report_csv(a, rep);
  write_report_csv(b, again);
  write_report_text(ta, rep);
  write_report_text(tb, again);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(ta.str(), tb.str());
}

TEST(Experiment, ErrorsCarryCellContext) {
  FieldDataset ds;
  for (int i = 0; i < 30; ++i) ds.records.push_back(fixtures::record("F" + std::to_string(i), i * 0.1, 0, 6.0 + i % 3));
  ExperimentConfig cfg;
  cfg.radii = {400};
  cfg.designs = "A";
  cfg.models = {ModelKind::LR};
  try {
    run_experiment(cfg, ds);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "empty_design");
    EXPECT_NE(std::string(e.what()).find("r400"), std::string::npos);
  }
}

TEST(Experiment, ReportFiles) {
  auto ds = fixtures::synth(300, 10);
  fixtures::TempDir dir("report");
  ExperimentConfig cfg;
  cfg.radii = {400, 1000};
  cfg.designs = "AB";
  cfg.models = {ModelKind::LR};
  cfg.ablation_models = {ModelKind::LR};
  auto rep = run_experiment(cfg, ds);
  write_report_files(dir.path(), rep);
  for (const char* f : {"report.csv", "folds.csv", "tables.txt", "neighbor_summary.csv", "timing.csv", "metadata.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir.path() / f)) << f;
  }
  auto csv = slurp(dir.path() / "report.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "design,label,features,model,r2,mae,rows,cols,blocks,converged");
  auto meta = nlohmann::json::parse(slurp(dir.path() / "metadata.json"));
  EXPECT_EQ(meta["seed"], 42);
  EXPECT_TRUE(meta.contains("total_seconds"));
}
