#pragma once

#include <span>

namespace soilph {

inline constexpr double kEarthRadiusM = 6'371'000.0;

struct GeoPoint {
  double longitude = 0.0;
  double latitude = 0.0;

  bool operator==(const GeoPoint&) const = default;
};

// Great-circle distance on a sphere of radius kEarthRadiusM.
double haversine_distance(const GeoPoint& a, const GeoPoint& b);

// Arithmetic mean of longitudes and latitudes. Good enough at field scale
// (a few km), not across the antimeridian. Throws Error{data, "empty_set"}.
GeoPoint centroid(std::span<const GeoPoint> points);

}  // namespace soilph
