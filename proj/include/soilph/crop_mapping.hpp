#pragma once

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace soilph {

enum class CropType { Crops, Vegetables, Fruits, Grass, Unknown };

std::string_view to_string(CropType type);
std::optional<CropType> crop_type_from_string(std::string_view name);

// Lowercased, whitespace-trimmed form used as the lookup key.
std::string normalize_crop_name(std::string_view name);

// Flat crop-name -> crop-type dictionary loaded from `name=Type` lines.
class CropMapping {
 public:
  CropMapping() = default;

  // Throws Error{data, "mapping_format"} on malformed lines or unknown types.
  static CropMapping parse(std::istream& in);
  static CropMapping load(const std::string& path);
  // The mapping shipped in data/crop_types.txt, compiled in.
  static const CropMapping& bundled();

  // Total: unmapped names give CropType::Unknown.
  CropType lookup(std::string_view crop_name) const;

  std::size_t size() const { return table_.size(); }

 private:
  std::map<std::string, CropType, std::less<>> table_;
};

inline CropType map_crop_type(std::string_view crop_name, const CropMapping& mapping) {
  return mapping.lookup(crop_name);
}

}  // namespace soilph
