#pragma once

#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "soilph/data_ingest.hpp"
#include "soilph/synth.hpp"

namespace fixtures {

inline soilph::FieldRecord record(std::string id, double lon, double lat, std::optional<double> ph,
                                  std::string crop = "wheat") {
  soilph::FieldRecord r;
  r.field_id = std::move(id);
  r.longitude = lon;
  r.latitude = lat;
  r.crop_name = std::move(crop);
  r.crop_type = soilph::map_crop_type(r.crop_name, soilph::CropMapping::bundled());
  r.ph = ph;
  return r;
}

inline soilph::ParseResult parse_text(const std::string& text, const soilph::ColumnSchema& schema = {}) {
  std::istringstream in(text);
  return soilph::parse_field_csv(in, schema);
}

// Synthetic set at the default density for `n` fields.
inline soilph::FieldDataset synth(std::size_t n, std::uint64_t seed, double noise_sd = 0.25,
                                  double correlation_length_m = 800.0) {
  auto cfg = soilph::SynthConfig::with_density(n, soilph::kDefaultFieldDensity);
  cfg.seed = seed;
  cfg.noise_sd = noise_sd;
  cfg.correlation_length_m = correlation_length_m;
  return soilph::generate_synthetic_fields(cfg);
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("soilph_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
