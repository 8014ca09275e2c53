#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "soilph/categorical.hpp"
#include "soilph/error.hpp"
#include "soilph/feature_builder.hpp"
#include "soilph/feature_spec.hpp"
#include "soilph/geo.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace soilph;

namespace {

// Neighbor pH statistics recomputed from scratch with the oracle scan.
struct Brute {
  std::size_t k = 0;
  double avg = 0, min = 0, max = 0, dist = 0;
};

Brute brute_stats(const FieldDataset& ds, std::size_t field, double r) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& rec : ds.records) pts.emplace_back(rec.longitude, rec.latitude);
  const auto& me = ds.records[field];
  auto hits = oracle::radius_scan(pts, me.longitude, me.latitude, r, field);
  Brute b;
  double lon = 0, lat = 0, sum = 0;
  b.min = 1e9;
  b.max = -1e9;
  for (const auto& h : hits) {
    const auto& rec = ds.records[h.handle];
    if (!rec.ph) continue;
    ++b.k;
    sum += *rec.ph;
    b.min = std::min(b.min, *rec.ph);
    b.max = std::max(b.max, *rec.ph);
    lon += rec.longitude;
    lat += rec.latitude;
  }
  if (b.k) {
    b.avg = sum / static_cast<double>(b.k);
    b.dist = oracle::distance_m(me.longitude, me.latitude, lon / static_cast<double>(b.k),
                                lat / static_cast<double>(b.k));
  }
  return b;
}

}  // namespace

TEST(NeighborStats, SingleNeighbor) {
  FieldDataset ds;
  ds.records = {fixtures::record("A", -1.5, 52.1, 7.0),
                fixtures::record("B", -1.5, oracle::lat_north_of(52.1, 150), 6.4)};
  auto idx = SpatialIndex::build(ds, 1000);
  auto f = neighbor_stats(ds, idx, 0, 200);
  EXPECT_EQ(f.k, 1u);
  EXPECT_EQ(f.ph_avg, 6.4);
  EXPECT_EQ(f.ph_min, 6.4);
  EXPECT_EQ(f.ph_max, 6.4);
  ASSERT_TRUE(f.dist_centroid_m);
  EXPECT_NEAR(*f.dist_centroid_m, 150, 0.5);
}

TEST(NeighborStats, ThreeNeighborsArithmetic) {
  FieldDataset ds;
  ds.records = {fixtures::record("A", -1.5, 52.1, 5.0), fixtures::record("B", -1.5, 52.1005, 6.0),
                fixtures::record("C", -1.5005, 52.1, 7.0), fixtures::record("D", -1.4995, 52.1, 8.0),
                fixtures::record("E", -1.4995, 52.1003, std::nullopt)};
  auto idx = SpatialIndex::build(ds, 1000);
  auto f = neighbor_stats(ds, idx, 0, 100);
  EXPECT_EQ(f.k, 3u);  // E has no pH and does not count
  EXPECT_DOUBLE_EQ(*f.ph_avg, 7.0);
  EXPECT_EQ(*f.ph_min, 6.0);
  EXPECT_EQ(*f.ph_max, 8.0);
  EXPECT_LE(*f.ph_min, *f.ph_avg);
  EXPECT_LE(*f.ph_avg, *f.ph_max);
}

TEST(NeighborStats, NoNeighborsGiveMissingStatistics) {
  FieldDataset ds;
  ds.records = {fixtures::record("A", 0, 0, 6.0), fixtures::record("B", 1, 1, 6.0)};
  auto idx = SpatialIndex::build(ds, 1000);
  auto f = neighbor_stats(ds, idx, 0, 1000);
  EXPECT_EQ(f.k, 0u);
  EXPECT_FALSE(f.ph_avg || f.ph_min || f.ph_max || f.dist_centroid_m);
}

TEST(NeighborStats, MatchesBruteForceOnSyntheticFields) {
  auto ds = fixtures::synth(50, 3);
  // 50 fields at the default density are sparse; shrink the box so that
  // every radius has neighbors to compare.
  auto cfg = SynthConfig::with_density(50, 40.0);
  cfg.seed = 3;
  ds = generate_synthetic_fields(cfg);
  ds.records[4].ph.reset();
  auto idx = SpatialIndex::build(ds, 2000);
  for (std::size_t f = 0; f < ds.size(); ++f) {
    for (double r : {100.0, 200.0, 300.0, 400.0, 500.0, 750.0, 1000.0, 1500.0, 2000.0}) {
      auto got = neighbor_stats(ds, idx, f, r);
      auto want = brute_stats(ds, f, r);
      ASSERT_EQ(got.k, want.k);
      if (want.k == 0) continue;
      EXPECT_NEAR(*got.ph_avg, want.avg, 1e-12);
      EXPECT_EQ(*got.ph_min, want.min);
      EXPECT_EQ(*got.ph_max, want.max);
      EXPECT_NEAR(*got.dist_centroid_m, want.dist, 1e-6);
    }
  }
}

TEST(NeighborStats, KNondecreasingInRadius) {
  auto ds = fixtures::synth(300, 9);
  auto idx = SpatialIndex::build(ds, 2000);
  for (std::size_t f = 0; f < ds.size(); ++f) {
    std::size_t prev = 0;
    for (double r : {100.0, 300.0, 700.0, 1200.0, 2000.0}) {
      auto k = neighbor_stats(ds, idx, f, r).k;
      EXPECT_GE(k, prev);
      prev = k;
    }
  }
}

TEST(NeighborSummary, SingleField) {
  FieldDataset ds;
  ds.records = {fixtures::record("A", 0, 0, 6.0)};
  auto idx = SpatialIndex::build(ds, 2000);
  std::vector<double> radii{100, 500, 2000};
  auto rows = neighbor_summary_table(ds, idx, radii);
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.fields_with_neighbors, 0u);
    EXPECT_FALSE(r.mean_k || r.mean_dist_m || r.mean_ph_spread);
  }
}

TEST(NeighborSummary, MatchesBruteAggregation) {
  auto ds = fixtures::synth(200, 21);
  auto idx = SpatialIndex::build(ds, 2000);
  std::vector<double> radii{100, 200, 300, 400, 500, 750, 1000, 1500, 2000};
  auto rows = neighbor_summary_table(ds, idx, radii, 3);
  std::vector<std::pair<double, double>> pts;
  for (const auto& rec : ds.records) pts.emplace_back(rec.longitude, rec.latitude);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    std::size_t with = 0;
    double k_sum = 0, dist_sum = 0, spread_sum = 0;
    for (std::size_t f = 0; f < ds.size(); ++f) {
      auto hits = oracle::radius_scan(pts, pts[f].first, pts[f].second, radii[i], f);
      std::vector<double> phs, ds_m;
      for (const auto& h : hits) {
        if (!ds.records[h.handle].ph) continue;
        phs.push_back(*ds.records[h.handle].ph);
        ds_m.push_back(h.distance_m);
      }
      if (phs.empty()) continue;
      ++with;
      k_sum += static_cast<double>(phs.size());
      double d = 0;
      for (double v : ds_m) d += v;
      dist_sum += d / static_cast<double>(ds_m.size());
      spread_sum += *std::max_element(phs.begin(), phs.end()) - *std::min_element(phs.begin(), phs.end());
    }
    EXPECT_EQ(rows[i].radius_m, radii[i]);
    ASSERT_EQ(rows[i].fields_with_neighbors, with);
    if (with == 0) continue;
    EXPECT_NEAR(*rows[i].mean_k, k_sum / static_cast<double>(with), 1e-12);
    EXPECT_NEAR(*rows[i].mean_dist_m, dist_sum / static_cast<double>(with), 1e-6);
    EXPECT_NEAR(*rows[i].mean_ph_spread, spread_sum / static_cast<double>(with), 1e-12);
  }
}

TEST(NeighborSummary, RejectsUnsortedRadiiAndIsWorkerIndependent) {
  auto ds = fixtures::synth(300, 2);
  auto idx = SpatialIndex::build(ds, 2000);
  std::vector<double> bad{500, 200};
  try {
    neighbor_summary_table(ds, idx, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "radius_order");
  }
  std::vector<double> radii{200, 500, 2000};
  EXPECT_EQ(neighbor_summary_table(ds, idx, radii, 1), neighbor_summary_table(ds, idx, radii, 4));
}

TEST(FeatureSpec, ParseLabelAndRoundTrip) {
  auto s = FeatureSpec::parse("crop_name,min:400,max:400,avg:400");
  EXPECT_EQ(s.label(), "CropName+Min/Max/Avg400");
  EXPECT_EQ(FeatureSpec::parse(s.to_string()), s);
  auto t = FeatureSpec::parse("nb:400,dist:400,avg:400,crop_type");
  EXPECT_EQ(t.label(), "Nb/Dist/Avg400+CropType");
  auto u = FeatureSpec::parse("long,lat,crop_name,require:200");
  EXPECT_EQ(u.blocks.size(), 3u);
  EXPECT_EQ(u.radii(), (std::vector<double>{200}));
  EXPECT_EQ(u.label(), "Long/Lat/CropName");
}

TEST(FeatureSpec, Validation) {
  auto code = [](const std::string& text, std::vector<double> allowed = {}) {
    try {
      FeatureSpec::parse(text).validate(allowed);
    } catch (const Error& e) {
      return e.code();
    }
    return std::string();
  };
  EXPECT_EQ(code("avg:400,avg:400"), "feature_spec");
  EXPECT_EQ(code("bogus"), "feature_spec");
  EXPECT_EQ(code("avg:0"), "feature_spec");
  EXPECT_EQ(code("avg:450", {100, 400}), "radius_range");
  EXPECT_EQ(code("avg:400,long", {100, 400}), "");
}

TEST(Categorical, OneHotAndOrdinalExamples) {
  std::vector<std::string> v{"a", "b", "a"};
  auto oh = encode_categorical(v, Encoding::one_hot, "c");
  Eigen::MatrixXd want(3, 2);
  want << 1, 0, 0, 1, 1, 0;
  EXPECT_EQ(oh.columns, want);
  EXPECT_EQ(oh.names, (std::vector<std::string>{"c=a", "c=b"}));
  auto ord = encode_categorical(v, Encoding::ordinal, "c");
  ASSERT_EQ(ord.columns.cols(), 1);
  EXPECT_EQ(ord.columns(0, 0), 0);
  EXPECT_EQ(ord.columns(1, 0), 1);
  EXPECT_EQ(ord.columns(2, 0), 0);
  EXPECT_THROW(encode_categorical(std::vector<std::string>{}, Encoding::one_hot), Error);
}

TEST(Categorical, FortyDistinctNamesSorted) {
  std::vector<std::string> v;
  std::mt19937_64 rng(1);
  for (int i = 0; i < 40; ++i) v.push_back("crop" + std::to_string(39 - i));
  for (int i = 0; i < 40; ++i) v.push_back(v[static_cast<std::size_t>(i)]);
  std::shuffle(v.begin(), v.end(), rng);
  auto oh = encode_categorical(v, Encoding::one_hot);
  EXPECT_EQ(oh.columns.cols(), 40);
  EXPECT_TRUE(std::is_sorted(oh.names.begin(), oh.names.end()));
}

TEST(Categorical, UnseenValues) {
  std::vector<std::string> train{"a", "b"};
  auto enc = CategoricalEncoder::fit(train, Encoding::one_hot);
  std::vector<std::string> test{"b", "zzz"};
  auto out = encode_categorical(test, enc);
  EXPECT_EQ(out.unseen, 1u);
  EXPECT_EQ(out.columns.row(1).sum(), 0.0);
  auto ord = CategoricalEncoder::fit(train, Encoding::ordinal);
  auto o = encode_categorical(test, ord);
  EXPECT_EQ(o.columns(1, 0), -1.0);
  EXPECT_EQ(o.columns(0, 0), 1.0);
}

TEST(DesignMatrix, LongLatOnly) {
  FieldDataset ds;
  for (int i = 0; i < 10; ++i) ds.records.push_back(fixtures::record("F" + std::to_string(i), i, i, 6.0 + i * 0.1));
  ds.records.push_back(fixtures::record("X", 50, 50, std::nullopt));
  auto idx = SpatialIndex::build(ds, 1000);
  auto dm = build_design_matrix(ds, idx, FeatureSpec::parse("long,lat"));
  EXPECT_EQ(dm.rows(), 10);
  EXPECT_EQ(dm.cols(), 2);
  EXPECT_EQ(dm.column_names, (std::vector<std::string>{"long", "lat"}));
  EXPECT_EQ(dm.x(3, 0), 3.0);
  EXPECT_EQ(dm.y(3), 6.3);
}

TEST(DesignMatrix, RowsAreFieldsWithNeighborsAtEveryRadius) {
  // 20 fields: 13 in a tight cluster, 7 isolated.
  FieldDataset ds;
  for (int i = 0; i < 13; ++i) {
    ds.records.push_back(fixtures::record("C" + std::to_string(i), -1.5 + 0.0005 * (i % 4), 52.1 + 0.0005 * (i / 4),
                                          6.0 + 0.1 * i, i % 2 ? "wheat" : "grass"));
  }
  for (int i = 0; i < 7; ++i) {
    ds.records.push_back(fixtures::record("I" + std::to_string(i), -1.0 + 0.1 * i, 51.0, 6.5));
  }
  auto idx = SpatialIndex::build(ds, 2000);
  std::size_t expected = 0;
  for (std::size_t f = 0; f < ds.size(); ++f) expected += brute_force_radius_query(ds, f, 400).empty() ? 0 : 1;
  ASSERT_EQ(expected, 13u);
  auto dm = build_design_matrix(ds, idx, FeatureSpec::parse("nb:400,dist:400,avg:400,crop_type"));
  EXPECT_EQ(static_cast<std::size_t>(dm.rows()), expected);
  EXPECT_EQ(dm.column_names,
            (std::vector<std::string>{"nb_400", "dist_400", "avg_400", "crop_type=Crops", "crop_type=Grass"}));
  for (Eigen::Index r = 0; r < dm.rows(); ++r) {
    auto f = dm.row_fields[static_cast<std::size_t>(r)];
    auto s = neighbor_stats(ds, idx, f, 400);
    EXPECT_EQ(dm.x(r, 0), static_cast<double>(s.k));
    EXPECT_EQ(dm.x(r, 1), *s.dist_centroid_m);
    EXPECT_EQ(dm.x(r, 2), *s.ph_avg);
    EXPECT_EQ(dm.y(r), *ds.records[f].ph);
  }
  EXPECT_FALSE(dm.x.hasNaN());
}

TEST(DesignMatrix, Errors) {
  FieldDataset ds;
  ds.records = {fixtures::record("A", 0, 0, 6.0), fixtures::record("B", 1, 1, 6.0)};
  auto idx = SpatialIndex::build(ds, 500);
  auto code = [&](const std::string& spec) {
    try {
      build_design_matrix(ds, idx, FeatureSpec::parse(spec));
    } catch (const Error& e) {
      return e.code();
    }
    return std::string();
  };
  EXPECT_EQ(code("avg:1000"), "radius_range");
  EXPECT_EQ(code("avg:400"), "empty_design");
}

TEST(DesignMatrix, DeterministicAcrossWorkers) {
  auto ds = fixtures::synth(600, 13);
  auto idx = SpatialIndex::build(ds, 2000);
  auto spec = FeatureSpec::parse("long,lat,crop_name,crop_type,nb:400,dist:400,avg:400,min:400,max:400,avg:1000");
  auto a = build_design_matrix(ds, idx, spec, 1);
  auto b = build_design_matrix(ds, idx, spec, 5);
  std::ostringstream sa, sb;
  write_design_csv(sa, a);
  write_design_csv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(a.row_fields, b.row_fields);
}

TEST(DesignMatrix, OwnPhNeverLeaks) {
  auto ds = fixtures::synth(500, 4);
  auto idx = SpatialIndex::build(ds, 1000);
  auto spec = FeatureSpec::parse("nb:1000,dist:1000,avg:1000,min:1000,max:1000");
  auto dm = build_design_matrix(ds, idx, spec);
  for (std::size_t r = 0; r < 20; ++r) {
    auto f = dm.row_fields[r];
    auto mod = ds;
    mod.records[f].ph = 14.0;
    auto dm2 = build_design_matrix(mod, idx, spec);
    ASSERT_EQ(dm2.row_fields[r], f);
    EXPECT_EQ(dm2.x.row(static_cast<Eigen::Index>(r)), dm.x.row(static_cast<Eigen::Index>(r)));
  }
}

TEST(FeatureRows, ReuseEncodersWithoutTarget) {
  auto ds = fixtures::synth(400, 6);
  auto idx = SpatialIndex::build(ds, 500);
  auto spec = FeatureSpec::parse("crop_name,avg:500");
  auto dm = build_design_matrix(ds, idx, spec);
  auto rows = build_feature_rows(ds, idx, spec, dm.encoders);
  EXPECT_EQ(rows.column_names, dm.column_names);
  EXPECT_EQ(rows.row_fields, dm.row_fields);  // every field has a pH here
  EXPECT_EQ(rows.x, dm.x);
  EXPECT_THROW(build_feature_rows(ds, idx, spec, {}), Error);
}
