#include "soilph/crop_mapping.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "soilph/error.hpp"

namespace soilph {

namespace detail {
extern const char* const kBundledCropTypes;
}

namespace {

std::string_view trim(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string_view to_string(CropType type) {
  switch (type) {
    case CropType::Crops: return "Crops";
    case CropType::Vegetables: return "Vegetables";
    case CropType::Fruits: return "Fruits";
    case CropType::Grass: return "Grass";
    case CropType::Unknown: return "Unknown";
  }
  return "Unknown";
}

std::optional<CropType> crop_type_from_string(std::string_view name) {
  for (auto t : {CropType::Crops, CropType::Vegetables, CropType::Fruits, CropType::Grass,
                 CropType::Unknown}) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

std::string normalize_crop_name(std::string_view name) {
  std::string out(trim(name));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

CropMapping CropMapping::parse(std::istream& in) {
  CropMapping mapping;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto body = trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty()) continue;
    auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw_data("mapping_format", "line " + std::to_string(line_no) + ": expected name=Type");
    }
    auto name = normalize_crop_name(body.substr(0, eq));
    auto type_name = trim(body.substr(eq + 1));
    auto type = crop_type_from_string(type_name);
    if (name.empty() || !type || *type == CropType::Unknown) {
      throw_data("mapping_format",
                 "line " + std::to_string(line_no) + ": bad entry '" + std::string(body) + "'");
    }
    mapping.table_[name] = *type;
  }
  return mapping;
}

CropMapping CropMapping::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_data("io", "cannot open crop mapping '" + path + "'");
  return parse(in);
}

const CropMapping& CropMapping::bundled() {
  static const CropMapping mapping = [] {
    std::istringstream in(detail::kBundledCropTypes);
    return parse(in);
  }();
  return mapping;
}

CropType CropMapping::lookup(std::string_view crop_name) const {
  auto it = table_.find(normalize_crop_name(crop_name));
  return it == table_.end() ? CropType::Unknown : it->second;
}

}  // namespace soilph
