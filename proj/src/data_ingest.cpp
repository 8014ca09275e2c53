#include "soilph/data_ingest.hpp"

#include <cmath>
#include <fstream>
#include <unordered_set>

#include "soilph/csv.hpp"
#include "soilph/error.hpp"

namespace soilph {

const std::vector<std::string>& canonical_columns() {
  static const std::vector<std::string> columns = {
      std::string(column::field_id), std::string(column::longitude),
      std::string(column::latitude), std::string(column::crop_name),
      std::string(column::ph),       std::string(column::p),
      std::string(column::k),        std::string(column::mg),
      std::string(column::sand),     std::string(column::clay),
      std::string(column::silt)};
  return columns;
}

ColumnSchema ColumnSchema::parse(std::string_view spec) {
  ColumnSchema schema;
  for (const auto& pair : csv::split_list(spec)) {
    auto eq = pair.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == pair.size()) {
      throw_usage("schema", "expected canonical=header, got '" + pair + "'");
    }
    schema.set(pair.substr(0, eq), pair.substr(eq + 1));
  }
  return schema;
}

void ColumnSchema::set(std::string canonical, std::string header) {
  bool known = false;
  for (const auto& c : canonical_columns()) known = known || c == canonical;
  if (!known) throw_usage("schema", "unknown canonical column '" + canonical + "'");
  headers_[std::move(canonical)] = std::move(header);
}

std::string ColumnSchema::header_for(std::string_view canonical) const {
  auto it = headers_.find(canonical);
  return it == headers_.end() ? std::string(canonical) : it->second;
}

namespace {

bool coord_in_range(double lon, double lat) {
  return lon >= -180.0 && lon <= 180.0 && lat >= -90.0 && lat <= 90.0;
}

bool ph_in_range(double ph) { return ph >= 0.0 && ph <= 14.0; }

bool pct_in_range(const std::optional<double>& v) { return !v || (*v >= 0.0 && *v <= 100.0); }

bool texture_sum_ok(const FieldRecord& r) {
  if (!r.sand_pct || !r.clay_pct || !r.silt_pct) return true;
  double sum = *r.sand_pct + *r.clay_pct + *r.silt_pct;
  return std::abs(sum - 100.0) <= kTextureSumTolerance;
}

bool index_ok(const std::optional<double>& v) { return !v || *v >= 0.0; }

// Record-level checks shared by parsing and validation, in reporting order.
std::vector<std::string> record_violations(const FieldRecord& r) {
  std::vector<std::string> out;
  if (r.field_id.empty()) out.emplace_back("missing_id");
  if (!coord_in_range(r.longitude, r.latitude)) out.emplace_back("coord_range");
  if (r.ph && !ph_in_range(*r.ph)) out.emplace_back("ph_range");
  if (!index_ok(r.p_index) || !index_ok(r.k_index) || !index_ok(r.mg_index)) {
    out.emplace_back("index_range");
  }
  if (!pct_in_range(r.sand_pct) || !pct_in_range(r.clay_pct) || !pct_in_range(r.silt_pct)) {
    out.emplace_back("texture_range");
  } else if (!texture_sum_ok(r)) {
    out.emplace_back("texture_sum");
  }
  return out;
}

}  // namespace

ParseResult parse_field_csv(std::istream& in, const ColumnSchema& schema,
                            const CropMapping& mapping) {
  if (!in) throw_data("io", "unreadable input stream");
  ParseResult result;
  std::string line;
  if (!std::getline(in, line)) {
    if (in.bad()) throw_data("io", "read failure");
    throw_data("schema", "missing header row");
  }
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  auto header = csv::split_line(line);

  std::map<std::string, std::size_t, std::less<>> col_index;
  for (const auto& canonical : canonical_columns()) {
    auto name = schema.header_for(canonical);
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) {
        col_index[canonical] = i;
        result.present_columns.insert(canonical);
        break;
      }
    }
  }
  for (auto required : {column::field_id, column::longitude, column::latitude}) {
    if (!col_index.count(required)) {
      throw_data("schema", "missing mandatory column '" + schema.header_for(required) + "'");
    }
  }

  std::unordered_set<std::string> seen_ids;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    auto cells = csv::split_line(line);
    auto reject = [&](std::string reason) {
      result.report.rejections.push_back({row, std::move(reason)});
      ++result.report.rejected_count;
    };
    if (cells.size() != header.size()) {
      reject("column_count");
      continue;
    }
    auto cell = [&](std::string_view canonical) -> std::string_view {
      auto it = col_index.find(canonical);
      return it == col_index.end() ? std::string_view{} : std::string_view(cells[it->second]);
    };
    auto number = [&](std::string_view canonical) { return csv::parse_double(cell(canonical)); };

    FieldRecord rec;
    rec.field_id = std::string(cell(column::field_id));
    auto lon = number(column::longitude);
    auto lat = number(column::latitude);
    if (!lon || !lat) {
      reject("coord_format");
      continue;
    }
    rec.longitude = *lon;
    rec.latitude = *lat;
    rec.crop_name = std::string(cell(column::crop_name));
    rec.crop_type = mapping.lookup(rec.crop_name);
    rec.ph = number(column::ph);
    rec.p_index = number(column::p);
    rec.k_index = number(column::k);
    rec.mg_index = number(column::mg);
    rec.sand_pct = number(column::sand);
    rec.clay_pct = number(column::clay);
    rec.silt_pct = number(column::silt);

    auto problems = record_violations(rec);
    if (problems.empty() && seen_ids.count(rec.field_id)) problems.emplace_back("dup_id");
    if (!problems.empty()) {
      reject(problems.front());
      continue;
    }
    seen_ids.insert(rec.field_id);
    result.dataset.records.push_back(std::move(rec));
    ++result.report.accepted_count;
  }
  if (in.bad()) throw_data("io", "read failure");
  return result;
}

ParseResult read_field_csv(const std::string& path, const ColumnSchema& schema,
                           const CropMapping& mapping) {
  std::ifstream in(path);
  if (!in) throw_data("io", "cannot open '" + path + "'");
  return parse_field_csv(in, schema, mapping);
}

void write_field_csv(std::ostream& out, const FieldDataset& ds) {
  const auto& cols = canonical_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); };
  for (const auto& r : ds.records) {
    out << csv::quote(r.field_id) << ',' << csv::format_double(r.longitude) << ','
        << csv::format_double(r.latitude) << ',' << csv::quote(r.crop_name) << ',' << opt(r.ph)
        << ',' << opt(r.p_index) << ',' << opt(r.k_index) << ',' << opt(r.mg_index) << ','
        << opt(r.sand_pct) << ',' << opt(r.clay_pct) << ',' << opt(r.silt_pct) << '\n';
  }
}

ValidationReport validate_dataset(const FieldDataset& ds) {
  ValidationReport report;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const auto& r = ds.records[i];
    auto problems = record_violations(r);
    if (!r.field_id.empty() && !seen.insert(r.field_id).second) problems.emplace_back("dup_id");
    for (auto& p : problems) report.rejections.push_back({i + 1, std::move(p)});
    if (problems.empty()) {
      ++report.accepted_count;
    } else {
      ++report.rejected_count;
    }
  }
  return report;
}

}  // namespace soilph
