#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "soilph/categorical.hpp"
#include "soilph/data_ingest.hpp"
#include "soilph/feature_spec.hpp"
#include "soilph/spatial_index.hpp"

namespace soilph {

// Neighbor pH statistics of one field at one radius. Only neighbors with a
// present pH count towards k; with k == 0 every statistic is missing.
struct RadiusFeatures {
  double radius_m = 0.0;
  std::size_t k = 0;
  std::optional<double> ph_avg;
  std::optional<double> ph_min;
  std::optional<double> ph_max;
  std::optional<double> dist_centroid_m;  // field to the centroid of its k neighbors

  bool operator==(const RadiusFeatures&) const = default;
};

RadiusFeatures neighbor_stats(const FieldDataset& ds, const SpatialIndex& idx, RowHandle field,
                              double radius_m);

// Statistics for an arbitrary location against the indexed dataset, e.g. a
// field that is not part of it.
RadiusFeatures neighbor_stats_at(const FieldDataset& ds, const SpatialIndex& idx,
                                 const GeoPoint& location, double radius_m,
                                 std::optional<RowHandle> exclude = std::nullopt);

// Reduces an already computed neighbor set.
RadiusFeatures summarize_neighbors(const FieldDataset& ds, const NeighborSet& neighbors);

// One row of the "fields with neighbors" validation table.
struct NeighborSummaryRow {
  double radius_m = 0.0;
  std::size_t fields_with_neighbors = 0;
  std::optional<double> mean_k;          // over fields with k >= 1
  std::optional<double> mean_dist_m;     // mean over those fields of their mean neighbor distance
  std::optional<double> mean_ph_spread;  // mean over those fields of max - min neighbor pH

  bool operator==(const NeighborSummaryRow&) const = default;
};

// `radii` must be ascending (Error{usage, "radius_order"}).
std::vector<NeighborSummaryRow> neighbor_summary_table(const FieldDataset& ds,
                                                       const SpatialIndex& idx,
                                                       std::span<const double> radii,
                                                       std::size_t workers = 1);

void write_summary_csv(std::ostream& out, std::span<const NeighborSummaryRow> rows);
void write_summary_text(std::ostream& out, std::span<const NeighborSummaryRow> rows);

struct DesignMatrix {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<RowHandle> row_fields;
  std::vector<std::string> column_names;
  // One fitted encoder per categorical block, in block order.
  std::vector<CategoricalEncoder> encoders;

  Eigen::Index rows() const { return x.rows(); }
  Eigen::Index cols() const { return x.cols(); }
};

// Rows are the fields with a present pH and at least one neighbor at every
// radius the feature spec references. Throws Error{usage, "radius_range"} for radii
// beyond the index and Error{data, "empty_design"} when no row survives.
DesignMatrix build_design_matrix(const FieldDataset& ds, const SpatialIndex& idx,
                                 const FeatureSpec& spec, std::size_t workers = 1);

// Prediction-time features: no target required, encoders reused as fitted.
struct FeatureRows {
  Eigen::MatrixXd x;
  std::vector<RowHandle> row_fields;
  std::vector<std::string> column_names;
  std::size_t unseen_categories = 0;
};

FeatureRows build_feature_rows(const FieldDataset& ds, const SpatialIndex& idx,
                               const FeatureSpec& spec,
                               std::span<const CategoricalEncoder> encoders,
                               std::size_t workers = 1);

// Header = column names then "ph"; one line per row.
void write_design_csv(std::ostream& out, const DesignMatrix& dm);

}  // namespace soilph
