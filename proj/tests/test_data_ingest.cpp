#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "soilph/crop_mapping.hpp"
#include "soilph/data_ingest.hpp"
#include "soilph/error.hpp"
#include "support/fixtures.hpp"

using namespace soilph;

namespace {

const std::string kHeader = "field_id,longitude,latitude,crop_name,ph\n";

std::string error_code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST(CropMapping, KnownCropNamesMapToTheirTypes) {
  const auto& m = CropMapping::bundled();
  EXPECT_EQ(map_crop_type("Grass", m), CropType::Grass);
  EXPECT_EQ(map_crop_type("  wheat ", m), CropType::Crops);
  EXPECT_EQ(map_crop_type("WHEAT", m), CropType::Crops);
  EXPECT_EQ(map_crop_type("unmapped-xyz", m), CropType::Unknown);
  EXPECT_EQ(map_crop_type("", m), CropType::Unknown);
}

TEST(CropMapping, EveryTypeIsRepresentedInBundledFile) {
  const auto& m = CropMapping::bundled();
  bool seen[4] = {};
  for (const auto& name : default_crop_pool()) {
    auto t = m.lookup(name);
    ASSERT_NE(t, CropType::Unknown) << name;
    seen[static_cast<int>(t)] = true;
  }
  EXPECT_TRUE(seen[0] && seen[1] && seen[2] && seen[3]);
}

TEST(CropMapping, TotalAndDeterministicOnArbitraryStrings) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> ch(1, 126);
  const auto& m = CropMapping::bundled();
  for (int i = 0; i < 500; ++i) {
    std::string s(static_cast<std::size_t>(i % 12), ' ');
    for (auto& c : s) c = static_cast<char>(ch(rng));
    EXPECT_EQ(m.lookup(s), m.lookup(s));
  }
}

TEST(CropMapping, ParseRejectsBadLinesAndSkipsComments) {
  std::istringstream good("# comment\n\nBeans = Vegetables\nrye=Crops  # trailing\n");
  auto m = CropMapping::parse(good);
  EXPECT_EQ(m.lookup("beans"), CropType::Vegetables);
  EXPECT_EQ(m.lookup("Rye"), CropType::Crops);

  std::istringstream no_eq("beans Vegetables\n");
  EXPECT_EQ(error_code_of([&] { CropMapping::parse(no_eq); }), "mapping_format");
  std::istringstream bad_type("beans=Legumes\n");
  EXPECT_EQ(error_code_of([&] { CropMapping::parse(bad_type); }), "mapping_format");
}

TEST(ParseFieldCsv, MinimalRow) {
  auto r = fixtures::parse_text(kHeader + "F1,-1.5,52.1,wheat,6.8\n");
  ASSERT_EQ(r.dataset.size(), 1u);
  EXPECT_EQ(r.report.rejected_count, 0u);
  EXPECT_EQ(r.report.accepted_count, 1u);
  const auto& rec = r.dataset.records[0];
  EXPECT_EQ(rec.field_id, "F1");
  EXPECT_DOUBLE_EQ(rec.longitude, -1.5);
  EXPECT_DOUBLE_EQ(rec.latitude, 52.1);
  EXPECT_EQ(rec.crop_type, CropType::Crops);
  EXPECT_EQ(rec.ph, 6.8);
  EXPECT_FALSE(rec.p_index.has_value());
  EXPECT_EQ(r.dataset.crs_note, "WGS84-lonlat");
}

TEST(ParseFieldCsv, LatitudeOutOfRangeIsRejected) {
  auto r = fixtures::parse_text(kHeader + "F1,-1.5,52.1,wheat,6.8\nF2,-1.5,95.0,wheat,6.8\n");
  EXPECT_EQ(r.report.accepted_count, 1u);
  EXPECT_EQ(r.report.rejected_count, 1u);
  ASSERT_EQ(r.report.rejections.size(), 1u);
  EXPECT_EQ(r.report.rejections[0].reason, "coord_range");
  EXPECT_EQ(r.report.rejections[0].row, 2u);
}

TEST(ParseFieldCsv, MalformedPhCellsBecomeMissing) {
  std::string text = kHeader;
  for (int i = 0; i < 10; ++i) {
    std::string ph = (i == 3 || i == 7) ? "n/a" : "6." + std::to_string(i);
    text += "F" + std::to_string(i) + ",-1.5," + std::to_string(52.0 + i * 0.01) + ",wheat," + ph + "\n";
  }
  auto r = fixtures::parse_text(text);
  EXPECT_EQ(r.dataset.size(), 10u);
  EXPECT_EQ(r.report.rejected_count, 0u);
  std::size_t missing = 0;
  for (const auto& rec : r.dataset.records) missing += rec.ph ? 0 : 1;
  EXPECT_EQ(missing, 2u);
  EXPECT_FALSE(r.dataset.records[3].ph.has_value());
  EXPECT_FALSE(r.dataset.records[7].ph.has_value());
}

TEST(ParseFieldCsv, MissingMandatoryColumnIsSchemaError) {
  try {
    fixtures::parse_text("field_id,longitude,crop_name\nF1,1,wheat\n");
    FAIL() << "expected schema error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::data);
    EXPECT_EQ(e.code(), "schema");
    EXPECT_NE(std::string(e.what()).find("latitude"), std::string::npos);
  }
}

TEST(ParseFieldCsv, UnreadablePathIsIoError) {
  try {
    read_field_csv("/nonexistent/dir/fields.csv");
    FAIL() << "expected io error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::data);
    EXPECT_EQ(e.code(), "io");
  }
}

TEST(ParseFieldCsv, EveryRowIsAccountedFor) {
  std::string text = "field_id,longitude,latitude,crop_name,ph,p,k,mg,sand,clay,silt\n"
                     "A,-1.5,52.1,wheat,6.8,1,2,3,40,30,30\n"
                     "B,abc,52.1,wheat,6.8,,,,,,\n"         // coord_format
                     ",-1.5,52.1,wheat,6.8,,,,,,\n"         // missing_id
                     "C,-1.5,52.1,wheat,15,,,,,,\n"         // ph_range
                     "D,-1.5,52.1,wheat,6.8,-1,,,,,\n"      // index_range
                     "E,-1.5,52.1,wheat,6.8,,,,40,30,40\n"  // texture_sum
                     "F,-1.5,52.1,wheat,6.8,,,,140,,\n"     // texture_range
                     "A,-1.4,52.1,wheat,6.8,,,,,,\n"        // dup_id
                     "G,-1.5,52.1\n"                        // column_count
                     "H,200,52.1,wheat,6.8,,,,,,\n";        // coord_range
  auto r = fixtures::parse_text(text);
  EXPECT_EQ(r.report.accepted_count + r.report.rejected_count, 10u);
  EXPECT_EQ(r.report.accepted_count, 1u);
  std::vector<std::string> reasons;
  for (const auto& rej : r.report.rejections) reasons.push_back(rej.reason);
  std::vector<std::string> expected = {"coord_format", "missing_id",  "ph_range",     "index_range", "texture_sum",
                                       "texture_range", "dup_id",     "column_count", "coord_range"};
  EXPECT_EQ(reasons, expected);
}

TEST(ParseFieldCsv, ColumnRemappingAndQuoting) {
  auto schema = ColumnSchema::parse("field_id=FieldID,longitude=Lon,latitude=Lat,crop_name=Crop,ph=pH");
  auto r = fixtures::parse_text("FieldID,Lat,Lon,Crop,pH,extra\n\"F, 1\",52.1,-1.5,\"Spring Barley\",6.5,zzz\n",
                                schema);
  ASSERT_EQ(r.dataset.size(), 1u);
  EXPECT_EQ(r.dataset.records[0].field_id, "F, 1");
  EXPECT_DOUBLE_EQ(r.dataset.records[0].longitude, -1.5);
  EXPECT_EQ(r.dataset.records[0].crop_name, "Spring Barley");
  EXPECT_TRUE(r.present_columns.contains("ph"));
  EXPECT_FALSE(r.present_columns.contains("sand"));
}

TEST(ParseFieldCsv, RoundTripPreservesRecords) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    FieldDataset ds;
    int n = 1 + trial * 3;
    for (int i = 0; i < n; ++i) {
      auto rec = fixtures::record("id " + std::to_string(i) + (i % 4 == 0 ? ",q\"x" : ""), -180 + 360 * u(rng),
                                  -90 + 180 * u(rng), std::nullopt,
                                  default_crop_pool()[static_cast<std::size_t>(i) % default_crop_pool().size()]);
      if (u(rng) < 0.8) rec.ph = 14 * u(rng);
      if (u(rng) < 0.5) rec.p_index = 9 * u(rng);
      if (u(rng) < 0.5) rec.k_index = 9 * u(rng);
      if (u(rng) < 0.5) rec.mg_index = 0.0;
      if (u(rng) < 0.5) {
        double sand = 100 * u(rng);
        double clay = (100 - sand) * u(rng);
        rec.sand_pct = sand;
        rec.clay_pct = clay;
        rec.silt_pct = 100 - sand - clay;
      }
      ds.records.push_back(rec);
    }
    std::ostringstream out;
    write_field_csv(out, ds);
    auto back = fixtures::parse_text(out.str());
    EXPECT_EQ(back.report.rejected_count, 0u);
    EXPECT_EQ(back.dataset, ds) << "trial " << trial;
  }
}

TEST(ValidateDataset, DuplicateIds) {
  FieldDataset ds;
  ds.records = {fixtures::record("F1", 0, 0, 6.0), fixtures::record("F1", 1, 1, 6.0)};
  auto rep = validate_dataset(ds);
  ASSERT_EQ(rep.rejections.size(), 1u);
  EXPECT_EQ(rep.rejections[0].reason, "dup_id");
  EXPECT_EQ(rep.rejections[0].row, 2u);
  EXPECT_EQ(rep.rejected_count, 1u);
  EXPECT_EQ(rep.accepted_count, 1u);
}

TEST(ValidateDataset, TextureSumTolerance) {
  auto with_texture = [](double s, double c, double t) {
    FieldDataset ds;
    auto r = fixtures::record("F1", 0, 0, 6.0);
    r.sand_pct = s;
    r.clay_pct = c;
    r.silt_pct = t;
    ds.records.push_back(r);
    return validate_dataset(ds);
  };
  EXPECT_TRUE(with_texture(40, 30, 30).rejections.empty());
  EXPECT_TRUE(with_texture(40, 30, 31.5).rejections.empty());
  auto bad = with_texture(40, 30, 40);
  ASSERT_EQ(bad.rejections.size(), 1u);
  EXPECT_EQ(bad.rejections[0].reason, "texture_sum");
}

TEST(ValidateDataset, PureAndIdempotent) {
  FieldDataset ds;
  ds.records = {fixtures::record("F1", 0, 0, 16.0), fixtures::record("F2", 1, 1, 6.0),
                fixtures::record("F2", 1, 1, 6.0)};
  auto copy = ds;
  auto a = validate_dataset(ds);
  auto b = validate_dataset(ds);
  EXPECT_EQ(a, b);
  EXPECT_EQ(ds, copy);
  EXPECT_EQ(a.accepted_count + a.rejected_count, ds.size());
}
