#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "soilph/data_ingest.hpp"
#include "soilph/geo.hpp"

namespace soilph {

using RowHandle = std::size_t;

struct Neighbor {
  RowHandle handle;
  double distance_m;

  bool operator==(const Neighbor&) const = default;
};

// Sorted by (distance_m, handle); every distance_m <= radius_m.
struct NeighborSet {
  std::vector<Neighbor> neighbors;
  GeoPoint query_center;
  double radius_m = 0.0;

  std::size_t size() const { return neighbors.size(); }
  bool empty() const { return neighbors.empty(); }
};

std::vector<GeoPoint> locations(const FieldDataset& ds);

// Immutable lat/lon bucket grid answering exact haversine radius queries.
// Cells are max_radius_m tall and at least max_radius_m wide at the highest
// indexed latitude, so a query inspects about 3x3 cells. Safe for concurrent
// queries.
class SpatialIndex {
 public:
  // Throws Error{data, "empty_dataset"} or Error{usage, "radius_range"}.
  static SpatialIndex build(std::span<const GeoPoint> points, double max_radius_m);
  static SpatialIndex build(const FieldDataset& ds, double max_radius_m);

  // Neighbors of an indexed point, excluding the point itself.
  // radius_m must lie in (0, max_radius_m], else Error{usage, "radius_range"}.
  NeighborSet radius_query(RowHandle center, double radius_m) const;

  // Indexed points within radius_m of an arbitrary location; `exclude` is
  // left out of the result when given.
  NeighborSet query_point(const GeoPoint& center, double radius_m,
                          std::optional<RowHandle> exclude = std::nullopt) const;

  std::size_t size() const { return points_.size(); }
  double max_radius_m() const { return max_radius_m_; }
  const GeoPoint& point(RowHandle h) const { return points_.at(h); }

 private:
  SpatialIndex() = default;
  std::uint64_t cell_key(std::int64_t row, std::int64_t col) const;
  std::int64_t row_of(double lat) const;
  std::int64_t col_of(double lon) const;

  std::vector<GeoPoint> points_;
  double max_radius_m_ = 0.0;
  double cell_lat_deg_ = 0.0;
  double cell_lon_deg_ = 0.0;
  std::int64_t n_rows_ = 0;
  std::int64_t n_cols_ = 0;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
};

// Exhaustive O(n) scan with the same semantics as SpatialIndex::radius_query
// (no upper radius bound). Used as the verification oracle.
NeighborSet brute_force_radius_query(std::span<const GeoPoint> points, RowHandle center,
                                     double radius_m);
NeighborSet brute_force_radius_query(const FieldDataset& ds, RowHandle center, double radius_m);

}  // namespace soilph
