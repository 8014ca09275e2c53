#include "soilph/feature_builder.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "soilph/csv.hpp"
#include "soilph/error.hpp"
#include "soilph/parallel.hpp"

namespace soilph {

namespace {

double sorted_sum(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return std::accumulate(v.begin(), v.end(), 0.0);
}

std::string categorical_value(const FieldRecord& r, BlockKind kind) {
  return kind == BlockKind::CropName ? normalize_crop_name(r.crop_name)
                                     : std::string(to_string(r.crop_type));
}

std::string_view categorical_prefix(BlockKind kind) {
  return kind == BlockKind::CropName ? "crop_name" : "crop_type";
}

// Per-field neighbor statistics for every radius of the feature spec, computed in
// parallel; indexed [field][radius position].
std::vector<std::vector<RadiusFeatures>> radius_table(const FieldDataset& ds,
                                                      const SpatialIndex& idx,
                                                      const std::vector<double>& radii,
                                                      std::size_t workers) {
  for (double r : radii) {
    if (!(r > 0.0) || r > idx.max_radius_m()) {
      throw_usage("radius_range", "radius " + format_radius(r) + " m exceeds the index maximum " +
                                      format_radius(idx.max_radius_m()) + " m");
    }
  }
  std::vector<std::vector<RadiusFeatures>> table(ds.size());
  parallel_for(ds.size(), workers, [&](std::size_t i) {
    table[i].reserve(radii.size());
    for (double r : radii) table[i].push_back(neighbor_stats(ds, idx, i, r));
  });
  return table;
}

struct Assembled {
  Eigen::MatrixXd x;
  std::vector<RowHandle> rows;
  std::vector<std::string> names;
  std::vector<CategoricalEncoder> encoders;
  std::size_t unseen = 0;
};

Assembled assemble(const FieldDataset& ds, const SpatialIndex& idx, const FeatureSpec& spec,
                   std::span<const CategoricalEncoder> fitted, bool require_target,
                   std::size_t workers) {
  spec.validate();
  if (ds.size() != idx.size()) {
    throw_usage("index_mismatch", "index does not cover the dataset");
  }
  auto radii = spec.radii();
  auto table = radius_table(ds, idx, radii, workers);
  auto radius_pos = [&](double r) {
    return static_cast<std::size_t>(std::lower_bound(radii.begin(), radii.end(), r) - radii.begin());
  };

  Assembled out;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (require_target && !ds.records[i].ph) continue;
    bool ok = std::all_of(table[i].begin(), table[i].end(),
                          [](const RadiusFeatures& f) { return f.k > 0; });
    if (ok) out.rows.push_back(i);
  }
  if (out.rows.empty()) {
    throw_data("empty_design", "no field satisfies the row requirements of '" + spec.to_string() + "'");
  }

  // Column layout and encoders.
  std::size_t n_categorical = 0;
  for (const auto& b : spec.blocks) n_categorical += is_categorical_block(b.kind) ? 1 : 0;
  if (!fitted.empty() && fitted.size() != n_categorical) {
    throw_usage("schema_mismatch", "encoder count does not match the feature spec");
  }
  std::vector<std::size_t> widths;
  std::size_t cat_i = 0;
  for (const auto& b : spec.blocks) {
    if (is_categorical_block(b.kind)) {
      CategoricalEncoder enc;
      if (fitted.empty()) {
        std::vector<std::string> values;
        values.reserve(out.rows.size());
        for (auto h : out.rows) values.push_back(categorical_value(ds.records[h], b.kind));
        enc = CategoricalEncoder::fit(values, spec.encoding);
      } else {
        enc = fitted[cat_i];
      }
      ++cat_i;
      auto names = enc.column_names(categorical_prefix(b.kind));
      out.names.insert(out.names.end(), names.begin(), names.end());
      widths.push_back(enc.width());
      out.encoders.push_back(std::move(enc));
    } else {
      std::string name;
      switch (b.kind) {
        case BlockKind::Long: name = "long"; break;
        case BlockKind::Lat: name = "lat"; break;
        case BlockKind::Nb: name = "nb_"; break;
        case BlockKind::Dist: name = "dist_"; break;
        case BlockKind::Avg: name = "avg_"; break;
        case BlockKind::Min: name = "min_"; break;
        case BlockKind::Max: name = "max_"; break;
        default: break;
      }
      if (is_radius_block(b.kind)) name += format_radius(b.radius_m);
      out.names.push_back(std::move(name));
      widths.push_back(1);
    }
  }

  out.x.resize(static_cast<Eigen::Index>(out.rows.size()), static_cast<Eigen::Index>(out.names.size()));
  std::vector<double> buf;
  for (std::size_t r = 0; r < out.rows.size(); ++r) {
    const auto h = out.rows[r];
    const auto& rec = ds.records[h];
    Eigen::Index col = 0;
    std::size_t enc_i = 0;
    for (std::size_t bi = 0; bi < spec.blocks.size(); ++bi) {
      const auto& b = spec.blocks[bi];
      auto row = static_cast<Eigen::Index>(r);
      if (is_categorical_block(b.kind)) {
        buf.assign(widths[bi], 0.0);
        if (!out.encoders[enc_i].encode(categorical_value(rec, b.kind), buf)) ++out.unseen;
        ++enc_i;
        for (double v : buf) out.x(row, col++) = v;
        continue;
      }
      double v = 0.0;
      if (is_radius_block(b.kind)) {
        const auto& f = table[h][radius_pos(b.radius_m)];
        switch (b.kind) {
          case BlockKind::Nb: v = static_cast<double>(f.k); break;
          case BlockKind::Dist: v = *f.dist_centroid_m; break;
          case BlockKind::Avg: v = *f.ph_avg; break;
          case BlockKind::Min: v = *f.ph_min; break;
          case BlockKind::Max: v = *f.ph_max; break;
          default: break;
        }
      } else {
        v = b.kind == BlockKind::Long ? rec.longitude : rec.latitude;
      }
      out.x(row, col++) = v;
    }
  }
  return out;
}

}  // namespace

RadiusFeatures summarize_neighbors(const FieldDataset& ds, const NeighborSet& neighbors) {
  RadiusFeatures f;
  f.radius_m = neighbors.radius_m;
  std::vector<double> phs;
  std::vector<GeoPoint> pts;
  for (const auto& n : neighbors.neighbors) {
    const auto& rec = ds.records.at(n.handle);
    if (!rec.ph) continue;
    phs.push_back(*rec.ph);
    pts.push_back({rec.longitude, rec.latitude});
  }
  f.k = phs.size();
  if (f.k == 0) return f;
  auto [mn, mx] = std::minmax_element(phs.begin(), phs.end());
  f.ph_min = *mn;
  f.ph_max = *mx;
  f.ph_avg = sorted_sum(phs) / static_cast<double>(f.k);
  f.dist_centroid_m = haversine_distance(neighbors.query_center, centroid(pts));
  return f;
}

RadiusFeatures neighbor_stats(const FieldDataset& ds, const SpatialIndex& idx, RowHandle field,
                              double radius_m) {
  return summarize_neighbors(ds, idx.radius_query(field, radius_m));
}

RadiusFeatures neighbor_stats_at(const FieldDataset& ds, const SpatialIndex& idx,
                                 const GeoPoint& location, double radius_m,
                                 std::optional<RowHandle> exclude) {
  return summarize_neighbors(ds, idx.query_point(location, radius_m, exclude));
}

std::vector<NeighborSummaryRow> neighbor_summary_table(const FieldDataset& ds,
                                                       const SpatialIndex& idx,
                                                       std::span<const double> radii,
                                                       std::size_t workers) {
  if (!std::is_sorted(radii.begin(), radii.end())) {
    throw_usage("radius_order", "radii must be ascending");
  }
  std::vector<NeighborSummaryRow> rows;
  for (double r : radii) {
    // Per field: (k, mean neighbor distance, pH spread).
    struct PerField {
      std::size_t k = 0;
      double mean_dist = 0.0;
      double spread = 0.0;
    };
    std::vector<PerField> per(ds.size());
    parallel_for(ds.size(), workers, [&](std::size_t i) {
      auto set = idx.radius_query(i, r);
      std::vector<double> dists;
      double lo = 0.0;
      double hi = 0.0;
      for (const auto& n : set.neighbors) {
        const auto& ph = ds.records[n.handle].ph;
        if (!ph) continue;
        if (dists.empty()) {
          lo = hi = *ph;
        } else {
          lo = std::min(lo, *ph);
          hi = std::max(hi, *ph);
        }
        dists.push_back(n.distance_m);
      }
      per[i].k = dists.size();
      if (!dists.empty()) {
        per[i].mean_dist = sorted_sum(dists) / static_cast<double>(dists.size());
        per[i].spread = hi - lo;
      }
    });
    NeighborSummaryRow row;
    row.radius_m = r;
    double sum_k = 0.0;
    double sum_dist = 0.0;
    double sum_spread = 0.0;
    for (const auto& p : per) {
      if (p.k == 0) continue;
      ++row.fields_with_neighbors;
      sum_k += static_cast<double>(p.k);
      sum_dist += p.mean_dist;
      sum_spread += p.spread;
    }
    if (row.fields_with_neighbors > 0) {
      auto n = static_cast<double>(row.fields_with_neighbors);
      row.mean_k = sum_k / n;
      row.mean_dist_m = sum_dist / n;
      row.mean_ph_spread = sum_spread / n;
    }
    rows.push_back(row);
  }
  return rows;
}

void write_summary_csv(std::ostream& out, std::span<const NeighborSummaryRow> rows) {
  auto opt = [](const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); };
  out << "radius_m,fields_with_neighbors,mean_k,mean_dist_m,mean_ph_spread\n";
  for (const auto& r : rows) {
    out << format_radius(r.radius_m) << ',' << r.fields_with_neighbors << ',' << opt(r.mean_k)
        << ',' << opt(r.mean_dist_m) << ',' << opt(r.mean_ph_spread) << '\n';
  }
}

void write_summary_text(std::ostream& out, std::span<const NeighborSummaryRow> rows) {
  auto opt = [](const std::optional<double>& v, int digits) {
    return v ? fmt::format("{:.{}f}", *v, digits) : std::string("-");
  };
  out << fmt::format("{:>8} {:>12} {:>10} {:>12} {:>14}\n", "radius_m", "fields_w_nb", "mean_k",
                     "mean_dist_m", "mean_spread_ph");
  for (const auto& r : rows) {
    out << fmt::format("{:>8} {:>12} {:>10} {:>12} {:>14}\n", format_radius(r.radius_m),
                       r.fields_with_neighbors, opt(r.mean_k, 2), opt(r.mean_dist_m, 2),
                       opt(r.mean_ph_spread, 3));
  }
}

DesignMatrix build_design_matrix(const FieldDataset& ds, const SpatialIndex& idx,
                                 const FeatureSpec& spec, std::size_t workers) {
  auto a = assemble(ds, idx, spec, {}, true, workers);
  DesignMatrix dm;
  dm.y.resize(static_cast<Eigen::Index>(a.rows.size()));
  for (std::size_t r = 0; r < a.rows.size(); ++r) {
    dm.y(static_cast<Eigen::Index>(r)) = *ds.records[a.rows[r]].ph;
  }
  dm.x = std::move(a.x);
  dm.row_fields = std::move(a.rows);
  dm.column_names = std::move(a.names);
  dm.encoders = std::move(a.encoders);
  return dm;
}

FeatureRows build_feature_rows(const FieldDataset& ds, const SpatialIndex& idx,
                               const FeatureSpec& spec,
                               std::span<const CategoricalEncoder> encoders,
                               std::size_t workers) {
  std::size_t n_categorical = 0;
  for (const auto& b : spec.blocks) n_categorical += is_categorical_block(b.kind) ? 1 : 0;
  if (encoders.size() != n_categorical) {
    throw_usage("schema_mismatch", "encoder count does not match the feature spec");
  }
  auto a = assemble(ds, idx, spec, encoders, false, workers);
  return {std::move(a.x), std::move(a.rows), std::move(a.names), a.unseen};
}

void write_design_csv(std::ostream& out, const DesignMatrix& dm) {
  for (const auto& name : dm.column_names) out << csv::quote(name) << ',';
  out << "ph\n";
  for (Eigen::Index r = 0; r < dm.rows(); ++r) {
    for (Eigen::Index c = 0; c < dm.cols(); ++c) out << csv::format_double(dm.x(r, c)) << ',';
    out << csv::format_double(dm.y(r)) << '\n';
  }
}

}  // namespace soilph
