#include "soilph/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "soilph/error.hpp"
#include "soilph/geo.hpp"
#include "soilph/regressors/ensemble.hpp"

namespace soilph {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// One decimal, as the nearest double to k / 10 so it prints cleanly.
double round1(double v) { return std::round(v * 10.0) / 10.0; }

}  // namespace

const std::vector<std::string>& default_crop_pool() {
  static const std::vector<std::string> pool = {
      "wheat",        "winter wheat", "barley",   "spring barley", "oats",     "oilseed rape",
      "maize",        "potatoes",     "sugar beet", "beans",       "peas",     "linseed",
      "carrots",      "onions",       "cabbage",  "lettuce",       "leeks",    "parsnips",
      "apples",       "pears",        "strawberries", "raspberries", "plums",  "cherries",
      "grass",        "permanent pasture", "temporary grass", "silage", "hay",  "ley"};
  return pool;
}

SynthConfig SynthConfig::with_density(std::size_t n_fields, double density_per_km2, double center_lon,
                                      double center_lat) {
  SynthConfig cfg;
  cfg.n_fields = n_fields;
  double side_m = std::sqrt(static_cast<double>(n_fields) / density_per_km2) * 1000.0;
  double half_lat = side_m / 2.0 / (kEarthRadiusM * kDegToRad);
  double half_lon = half_lat / std::cos(center_lat * kDegToRad);
  cfg.lon_min = center_lon - half_lon;
  cfg.lon_max = center_lon + half_lon;
  cfg.lat_min = center_lat - half_lat;
  cfg.lat_max = center_lat + half_lat;
  return cfg;
}

void SynthConfig::validate() const {
  auto fail = [](const std::string& what) { throw_usage("synth_config", what); };
  if (n_fields == 0) fail("n_fields must be >= 1");
  if (!(lon_min < lon_max) || !(lat_min < lat_max)) fail("bounding box is degenerate");
  if (lon_min < -180.0 || lon_max > 180.0 || lat_min < -90.0 || lat_max > 90.0) {
    fail("bounding box outside WGS84 range");
  }
  if (!(correlation_length_m > 0.0)) fail("correlation_length_m must be > 0");
  if (!(noise_sd >= 0.0)) fail("noise_sd must be >= 0");
  if (!(ph_amplitude >= 0.0)) fail("ph_amplitude must be >= 0");
  if (crop_pool.empty()) fail("crop pool is empty");
}

SmoothSurface::SmoothSurface(double correlation_length_m, double origin_lon, double origin_lat,
                             std::uint64_t seed)
    : origin_lon_(origin_lon), origin_lat_(origin_lat) {
  m_per_deg_lat_ = kEarthRadiusM * kDegToRad;
  m_per_deg_lon_ = m_per_deg_lat_ * std::cos(origin_lat * kDegToRad);
  std::mt19937_64 rng(mix_seed(seed, 0x5eed));
  std::normal_distribution<double> wave(0.0, 1.0 / correlation_length_m);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  for (int k = 0; k < kTerms; ++k) {
    wx_.push_back(wave(rng));
    wy_.push_back(wave(rng));
    phase_.push_back(phase(rng));
  }
}

double SmoothSurface::operator()(double lon, double lat) const {
  double x = (lon - origin_lon_) * m_per_deg_lon_;
  double y = (lat - origin_lat_) * m_per_deg_lat_;
  double s = 0.0;
  for (std::size_t k = 0; k < wx_.size(); ++k) s += std::cos(wx_[k] * x + wy_[k] * y + phase_[k]);
  // Each cosine with a uniform phase has variance 1/2.
  return s * std::sqrt(2.0 / static_cast<double>(wx_.size()));
}

FieldDataset generate_synthetic_fields(const SynthConfig& cfg) {
  cfg.validate();
  double origin_lon = (cfg.lon_min + cfg.lon_max) / 2.0;
  double origin_lat = (cfg.lat_min + cfg.lat_max) / 2.0;
  SmoothSurface surface(cfg.correlation_length_m, origin_lon, origin_lat, cfg.seed);

  FieldDataset ds;
  ds.records.resize(cfg.n_fields);
  const auto& mapping = CropMapping::bundled();
  for (std::size_t i = 0; i < cfg.n_fields; ++i) {
    // Per-field stream so fields can be generated independently.
    std::mt19937_64 rng(mix_seed(cfg.seed, i + 1));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto& r = ds.records[i];
    r.field_id = fmt::format("F{:05d}", i + 1);
    r.longitude = cfg.lon_min + (cfg.lon_max - cfg.lon_min) * u01(rng);
    r.latitude = cfg.lat_min + (cfg.lat_max - cfg.lat_min) * u01(rng);
    auto crop_i = std::min(cfg.crop_pool.size() - 1,
                           static_cast<std::size_t>(u01(rng) * static_cast<double>(cfg.crop_pool.size())));
    r.crop_name = cfg.crop_pool[crop_i];
    r.crop_type = mapping.lookup(r.crop_name);
    double ph = cfg.ph_base + cfg.ph_amplitude * surface(r.longitude, r.latitude) + cfg.noise_sd * gauss(rng);
    r.ph = std::clamp(ph, kSynthPhLow, kSynthPhHigh);
    r.p_index = round1(std::clamp(2.0 + gauss(rng), 0.0, 9.0));
    r.k_index = round1(std::clamp(2.0 + gauss(rng), 0.0, 9.0));
    r.mg_index = round1(std::clamp(2.0 + gauss(rng), 0.0, 9.0));
    double sand = round1(std::clamp(40.0 + 12.0 * gauss(rng), 5.0, 85.0));
    double clay = round1(std::clamp(25.0 + 8.0 * gauss(rng), 5.0, 95.0 - sand));
    r.sand_pct = sand;
    r.clay_pct = clay;
    r.silt_pct = round1(100.0 - sand - clay);
  }
  return ds;
}

}  // namespace soilph
