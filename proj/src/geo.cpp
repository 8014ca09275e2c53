#include "soilph/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "soilph/error.hpp"

namespace soilph {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
}

double haversine_distance(const GeoPoint& a, const GeoPoint& b) {
  double lat1 = a.latitude * kDegToRad;
  double lat2 = b.latitude * kDegToRad;
  double dlat = lat2 - lat1;
  double dlon = (b.longitude - a.longitude) * kDegToRad;
  double s1 = std::sin(dlat / 2.0);
  double s2 = std::sin(dlon / 2.0);
  double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

GeoPoint centroid(std::span<const GeoPoint> points) {
  if (points.empty()) throw_data("empty_set", "centroid of an empty point list");
  // Summing in sorted order makes the result independent of input order.
  std::vector<double> lons;
  std::vector<double> lats;
  lons.reserve(points.size());
  lats.reserve(points.size());
  for (const auto& p : points) {
    lons.push_back(p.longitude);
    lats.push_back(p.latitude);
  }
  std::sort(lons.begin(), lons.end());
  std::sort(lats.begin(), lats.end());
  auto n = static_cast<double>(points.size());
  return {std::accumulate(lons.begin(), lons.end(), 0.0) / n,
          std::accumulate(lats.begin(), lats.end(), 0.0) / n};
}

}  // namespace soilph
