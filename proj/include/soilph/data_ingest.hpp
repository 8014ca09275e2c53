#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "soilph/crop_mapping.hpp"

namespace soilph {

// One sampled field. Optional attributes are genuinely missing when empty;
// a missing value is never stored as 0.
struct FieldRecord {
  std::string field_id;
  double longitude = 0.0;  // WGS84 degrees
  double latitude = 0.0;
  std::string crop_name;
  CropType crop_type = CropType::Unknown;
  std::optional<double> ph;
  std::optional<double> p_index;
  std::optional<double> k_index;
  std::optional<double> mg_index;
  std::optional<double> sand_pct;
  std::optional<double> clay_pct;
  std::optional<double> silt_pct;

  bool operator==(const FieldRecord&) const = default;
};

// Ordered records; the position of a record is its row handle.
struct FieldDataset {
  static constexpr std::string_view crs_note = "WGS84-lonlat";
  std::vector<FieldRecord> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  bool operator==(const FieldDataset&) const = default;
};

struct Rejection {
  std::size_t row;  // 1-based data row (header excluded), or record index + 1
  std::string reason;

  bool operator==(const Rejection&) const = default;
};

struct ValidationReport {
  std::size_t accepted_count = 0;
  std::size_t rejected_count = 0;
  std::vector<Rejection> rejections;

  bool operator==(const ValidationReport&) const = default;
};

// Canonical column names.
namespace column {
inline constexpr std::string_view field_id = "field_id";
inline constexpr std::string_view longitude = "longitude";
inline constexpr std::string_view latitude = "latitude";
inline constexpr std::string_view crop_name = "crop_name";
inline constexpr std::string_view ph = "ph";
inline constexpr std::string_view p = "p";
inline constexpr std::string_view k = "k";
inline constexpr std::string_view mg = "mg";
inline constexpr std::string_view sand = "sand";
inline constexpr std::string_view clay = "clay";
inline constexpr std::string_view silt = "silt";
}  // namespace column

const std::vector<std::string>& canonical_columns();

// Maps canonical field names to the header names used in a particular file.
// Unmapped names default to themselves.
class ColumnSchema {
 public:
  ColumnSchema() = default;
  // "canonical=header" pairs, comma separated (as given on the command line).
  static ColumnSchema parse(std::string_view spec);

  void set(std::string canonical, std::string header);
  std::string header_for(std::string_view canonical) const;

 private:
  std::map<std::string, std::string, std::less<>> headers_;
};

struct ParseResult {
  FieldDataset dataset;
  ValidationReport report;
  // Canonical columns found in the header.
  std::set<std::string, std::less<>> present_columns;
};

// Rows that violate a record invariant become rejections (coord_range,
// coord_format, missing_id, dup_id, ph_range, texture_range, texture_sum,
// index_range, column_count); unparseable optional cells are recorded as
// missing. Throws Error{data, "io"} for unreadable streams and
// Error{data, "schema"} when id/longitude/latitude columns are absent.
ParseResult parse_field_csv(std::istream& in, const ColumnSchema& schema = {},
                            const CropMapping& mapping = CropMapping::bundled());
ParseResult read_field_csv(const std::string& path, const ColumnSchema& schema = {},
                           const CropMapping& mapping = CropMapping::bundled());

// Writes the canonical schema; missing values become empty cells.
void write_field_csv(std::ostream& out, const FieldDataset& ds);

inline constexpr double kTextureSumTolerance = 1.5;

// Reports duplicate ids, coordinate/pH/texture range problems and texture-sum
// violations. Pure; the dataset is not modified.
ValidationReport validate_dataset(const FieldDataset& ds);

}  // namespace soilph
