#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "soilph/data_ingest.hpp"

namespace soilph {

inline constexpr double kSynthPhLow = 5.0;
inline constexpr double kSynthPhHigh = 8.5;

// Fields per km^2 of the default box. Uniform fields at this density have
// about 2.3 neighbors within 400 m when they have any.
inline constexpr double kDefaultFieldDensity = 3.8;

const std::vector<std::string>& default_crop_pool();

struct SynthConfig {
  std::size_t n_fields = 3809;
  // About 1,000 km^2 around (-1.4, 52.1): kDefaultFieldDensity at 3,809 fields.
  double lon_min = -1.631755;
  double lon_max = -1.168245;
  double lat_min = 51.957636;
  double lat_max = 52.242364;
  double correlation_length_m = 800.0;
  double ph_base = 6.5;
  double ph_amplitude = 0.6;
  double noise_sd = 0.25;
  std::vector<std::string> crop_pool = default_crop_pool();
  std::uint64_t seed = 42;

  // Square box centred on (lon, lat) whose area gives `density_per_km2`.
  static SynthConfig with_density(std::size_t n_fields, double density_per_km2,
                                  double center_lon = -1.4, double center_lat = 52.1);

  // Throws Error{usage, "synth_config"}.
  void validate() const;
};


// Uniform field locations; pH = base + amplitude * smooth random surface +
// N(0, noise_sd), clipped to [5, 8.5]. The surface is a sum of random
// cosines with Gaussian-distributed wave vectors (scale 1 / correlation
// length) over local projected metres, normalized to unit variance.
// Auxiliary attributes are seeded noise. Deterministic per seed.
FieldDataset generate_synthetic_fields(const SynthConfig& cfg);

// The smooth component alone at a location (for tests).
class SmoothSurface {
 public:
  SmoothSurface(double correlation_length_m, double origin_lon, double origin_lat, std::uint64_t seed);
  double operator()(double lon, double lat) const;

  static constexpr int kTerms = 20;

 private:
  double origin_lon_;
  double origin_lat_;
  double m_per_deg_lon_;
  double m_per_deg_lat_;
  std::vector<double> wx_;
  std::vector<double> wy_;
  std::vector<double> phase_;
};

}  // namespace soilph
