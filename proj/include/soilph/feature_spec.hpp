#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "soilph/categorical.hpp"

namespace soilph {

enum class BlockKind { Long, Lat, CropName, CropType, Nb, Dist, Avg, Min, Max };

bool is_radius_block(BlockKind kind);
bool is_categorical_block(BlockKind kind);

struct FeatureBlock {
  BlockKind kind;
  double radius_m = 0.0;  // only meaningful for radius blocks

  bool operator==(const FeatureBlock&) const = default;
};

// Ordered feature blocks plus the categorical encoding.
//
// Text form (used by the CLI and config files) is a comma list such as
// "long,lat,crop_name,nb:400,dist:400,avg:400"; "require:200" adds a
// row-filter radius without emitting any column.
struct FeatureSpec {
  std::vector<FeatureBlock> blocks;
  Encoding encoding = Encoding::one_hot;
  // Rows must also have at least one neighbor at each of these radii.
  std::vector<double> row_filter_radii;

  static FeatureSpec parse(std::string_view text, Encoding encoding = Encoding::one_hot);
  std::string to_string() const;
  // Compact display form, e.g. "CropName+Min/Max/Avg400".
  std::string label() const;

  // Sorted distinct radii referenced by blocks and row filters.
  std::vector<double> radii() const;

  // Throws Error{usage, "feature_spec"} on duplicate blocks, empty specs or
  // non-positive radii, and Error{usage, "radius_range"} when a radius is not
  // in `allowed` (if non-empty).
  void validate(const std::vector<double>& allowed = {}) const;

  bool operator==(const FeatureSpec&) const = default;
};

std::string format_radius(double radius_m);

}  // namespace soilph
