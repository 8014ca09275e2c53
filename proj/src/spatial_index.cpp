#include "soilph/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "soilph/error.hpp"

namespace soilph {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kDegToRad = std::numbers::pi / 180.0;
// Inflation applied to search windows so rounding in the window bounds can
// never drop a point the haversine filter would accept.
constexpr double kWindowSlack = 1e-9;

bool valid_point(const GeoPoint& p) {
  return std::isfinite(p.longitude) && std::isfinite(p.latitude) && p.longitude >= -180.0 &&
         p.longitude <= 180.0 && p.latitude >= -90.0 && p.latitude <= 90.0;
}

// Half-width in longitude degrees of the spherical cap of angular radius
// `theta` around a point at latitude `lat_deg`; nullopt if the cap reaches a pole.
std::optional<double> cap_half_width_deg(double lat_deg, double theta) {
  double s = std::sin(theta);
  double c = std::cos(std::abs(lat_deg) * kDegToRad);
  if (theta >= std::numbers::pi / 2.0 || s >= c * (1.0 - kWindowSlack)) return std::nullopt;
  return std::asin(s / c) * kRadToDeg;
}

void sort_neighbors(std::vector<Neighbor>& v) {
  std::sort(v.begin(), v.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.distance_m != b.distance_m ? a.distance_m < b.distance_m : a.handle < b.handle;
  });
}

void check_radius(double radius_m, double max_radius_m) {
  if (!(radius_m > 0.0) || !(radius_m <= max_radius_m)) {
    throw_usage("radius_range", "radius " + std::to_string(radius_m) + " m outside (0, " +
                                    std::to_string(max_radius_m) + "]");
  }
}

}  // namespace

std::vector<GeoPoint> locations(const FieldDataset& ds) {
  std::vector<GeoPoint> out;
  out.reserve(ds.size());
  for (const auto& r : ds.records) out.push_back({r.longitude, r.latitude});
  return out;
}

SpatialIndex SpatialIndex::build(const FieldDataset& ds, double max_radius_m) {
  auto pts = locations(ds);
  return build(pts, max_radius_m);
}

SpatialIndex SpatialIndex::build(std::span<const GeoPoint> points, double max_radius_m) {
  if (points.empty()) throw_data("empty_dataset", "cannot index an empty dataset");
  if (!(max_radius_m > 0.0) || !std::isfinite(max_radius_m)) {
    throw_usage("radius_range", "max radius must be positive");
  }
  SpatialIndex idx;
  idx.points_.assign(points.begin(), points.end());
  idx.max_radius_m_ = max_radius_m;

  double max_abs_lat = 0.0;
  for (const auto& p : points) {
    if (!valid_point(p)) throw_data("coord_range", "point outside WGS84 lon/lat bounds");
    max_abs_lat = std::max(max_abs_lat, std::abs(p.latitude));
  }

  double theta = max_radius_m / kEarthRadiusM;
  idx.cell_lat_deg_ = std::min(180.0, theta * kRadToDeg);
  idx.n_rows_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(180.0 / idx.cell_lat_deg_)));
  auto half = cap_half_width_deg(max_abs_lat, theta);
  idx.n_cols_ = half ? std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(360.0 / *half)))
                     : 1;
  // Equal-width columns that tile the full circle, each at least `half` wide.
  idx.cell_lon_deg_ = 360.0 / static_cast<double>(idx.n_cols_);

  for (std::size_t i = 0; i < idx.points_.size(); ++i) {
    const auto& p = idx.points_[i];
    auto key = idx.cell_key(idx.row_of(p.latitude), idx.col_of(p.longitude));
    idx.cells_[key].push_back(static_cast<std::uint32_t>(i));
  }
  return idx;
}

std::uint64_t SpatialIndex::cell_key(std::int64_t row, std::int64_t col) const {
  return static_cast<std::uint64_t>(row) * static_cast<std::uint64_t>(n_cols_) +
         static_cast<std::uint64_t>(col);
}

std::int64_t SpatialIndex::row_of(double lat) const {
  auto r = static_cast<std::int64_t>(std::floor((lat + 90.0) / cell_lat_deg_));
  return std::clamp<std::int64_t>(r, 0, n_rows_ - 1);
}

std::int64_t SpatialIndex::col_of(double lon) const {
  auto c = static_cast<std::int64_t>(std::floor((lon + 180.0) / cell_lon_deg_));
  c %= n_cols_;
  return c < 0 ? c + n_cols_ : c;
}

NeighborSet SpatialIndex::radius_query(RowHandle center, double radius_m) const {
  if (center >= points_.size()) {
    throw_usage("handle_range", "row handle " + std::to_string(center) + " not indexed");
  }
  return query_point(points_[center], radius_m, center);
}

NeighborSet SpatialIndex::query_point(const GeoPoint& center, double radius_m,
                                      std::optional<RowHandle> exclude) const {
  check_radius(radius_m, max_radius_m_);
  if (!valid_point(center)) throw_data("coord_range", "query point outside WGS84 bounds");

  NeighborSet out{{}, center, radius_m};
  double theta = radius_m / kEarthRadiusM;
  double dlat = theta * kRadToDeg * (1.0 + kWindowSlack) + kWindowSlack;
  auto row_lo = row_of(center.latitude - dlat);
  auto row_hi = row_of(center.latitude + dlat);

  std::vector<std::int64_t> cols;
  auto half = cap_half_width_deg(center.latitude, theta);
  if (!half || n_cols_ <= 3) {
    for (std::int64_t c = 0; c < n_cols_; ++c) cols.push_back(c);
  } else {
    double dlon = *half * (1.0 + kWindowSlack) + kWindowSlack;
    auto lo = static_cast<std::int64_t>(std::floor((center.longitude - dlon + 180.0) / cell_lon_deg_));
    auto hi = static_cast<std::int64_t>(std::floor((center.longitude + dlon + 180.0) / cell_lon_deg_));
    if (hi - lo + 1 >= n_cols_) {
      for (std::int64_t c = 0; c < n_cols_; ++c) cols.push_back(c);
    } else {
      for (auto c = lo; c <= hi; ++c) cols.push_back(((c % n_cols_) + n_cols_) % n_cols_);
    }
  }

  for (auto r = row_lo; r <= row_hi; ++r) {
    for (auto c : cols) {
      auto it = cells_.find(cell_key(r, c));
      if (it == cells_.end()) continue;
      for (auto h : it->second) {
        if (exclude && h == *exclude) continue;
        double d = haversine_distance(center, points_[h]);
        if (d <= radius_m) out.neighbors.push_back({h, d});
      }
    }
  }
  sort_neighbors(out.neighbors);
  return out;
}

NeighborSet brute_force_radius_query(std::span<const GeoPoint> points, RowHandle center,
                                     double radius_m) {
  if (center >= points.size()) {
    throw_usage("handle_range", "row handle " + std::to_string(center) + " out of range");
  }
  check_radius(radius_m, std::numeric_limits<double>::max());
  NeighborSet out{{}, points[center], radius_m};
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i == center) continue;
    double d = haversine_distance(points[center], points[i]);
    if (d <= radius_m) out.neighbors.push_back({i, d});
  }
  sort_neighbors(out.neighbors);
  return out;
}

NeighborSet brute_force_radius_query(const FieldDataset& ds, RowHandle center, double radius_m) {
  auto pts = locations(ds);
  return brute_force_radius_query(pts, center, radius_m);
}

}  // namespace soilph
