#include "histopheno/features.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "histopheno/csv.hpp"

namespace histopheno {

bool is_tissue_category(TissueCategory c) {
  return c != TissueCategory::Normal && c != TissueCategory::Fat &&
         c != TissueCategory::Background;
}

std::vector<TissueCategory> counted_tissue_categories() {
  std::vector<TissueCategory> out;
  for (int i = 0; i < kTissueCategoryCount; ++i) {
    const auto c = static_cast<TissueCategory>(i);
    if (is_tissue_category(c)) out.push_back(c);
  }
  return out;
}

std::set<TileAddress> tissue_tiles(const TissueLabelGrid& grid) {
  std::set<TileAddress> out;
  for (const auto& [addr, label] : grid.labels) {
    if (is_tissue_category(label)) out.insert(addr);
  }
  return out;
}

std::map<int, double> cf_phenotype_ratios(const std::map<TileAddress, int>& assignments,
                                          const std::set<TileAddress>& tissue, int k) {
  if (tissue.empty()) {
    throw ValidationError("cf_phenotype_ratios: slide has no tissue tiles");
  }
  std::map<int, double> ratios;
  for (int p = 0; p < k; ++p) ratios[p] = 0.0;
  for (const TileAddress& addr : tissue) {
    const auto it = assignments.find(addr);
    if (it == assignments.end()) continue;  // unphenotyped: denominator only
    if (it->second < 0 || it->second >= k) {
      throw ValidationError("cf_phenotype_ratios: assignment outside phenotype range");
    }
    ratios[it->second] += 1.0;
  }
  const double denom = static_cast<double>(tissue.size());
  for (auto& [p, v] : ratios) v /= denom;
  return ratios;
}

std::map<TissueCategory, double> ap_phenotype_ratios(const TissueLabelGrid& grid) {
  std::map<TissueCategory, double> counts;
  for (const TissueCategory c : counted_tissue_categories()) counts[c] = 0.0;
  double tissue_count = 0.0;
  for (const auto& [addr, label] : grid.labels) {
    if (!is_tissue_category(label)) continue;
    counts[label] += 1.0;
    tissue_count += 1.0;
  }
  if (tissue_count == 0.0) {
    throw ValidationError("ap_phenotype_ratios: slide has no tissue tiles");
  }
  for (auto& [c, v] : counts) v /= tissue_count;
  return counts;
}

double morisita_index(const CellMap& map, double quadrat_size) {
  if (quadrat_size <= 0.0) {
    throw ValidationError("morisita_index: quadrat size must be positive");
  }
  const auto cols = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::ceil(map.width / quadrat_size)));
  const auto rows = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::ceil(map.height / quadrat_size)));
  std::vector<double> x(static_cast<std::size_t>(cols * rows), 0.0);  // inflammatory
  std::vector<double> y(static_cast<std::size_t>(cols * rows), 0.0);  // malignant
  for (const CellRecord& cell : map.cells) {
    if (cell.cls != CellClass::I && cell.cls != CellClass::M) continue;
    // Clamp so cells sitting exactly on the extent edge stay counted.
    const auto c = std::min<std::int64_t>(
        cols - 1, static_cast<std::int64_t>(std::floor(cell.x / quadrat_size)));
    const auto r = std::min<std::int64_t>(
        rows - 1, static_cast<std::int64_t>(std::floor(cell.y / quadrat_size)));
    const auto q = static_cast<std::size_t>(r * cols + c);
    if (cell.cls == CellClass::I) {
      x[q] += 1.0;
    } else {
      y[q] += 1.0;
    }
  }
  double sum_x = 0.0, sum_y = 0.0, sum_xy = 0.0, sum_x2 = 0.0, sum_y2 = 0.0;
  for (std::size_t q = 0; q < x.size(); ++q) {
    sum_x += x[q];
    sum_y += y[q];
    sum_xy += x[q] * y[q];
    sum_x2 += x[q] * x[q];
    sum_y2 += y[q] * y[q];
  }
  if (sum_x == 0.0 || sum_y == 0.0) {
    throw ValidationError("morisita_index: slide lacks one of the two cell populations");
  }
  const double dx = sum_x2 / (sum_x * sum_x);
  const double dy = sum_y2 / (sum_y * sum_y);
  return 2.0 * sum_xy / ((dx + dy) * sum_x * sum_y);
}

double area_pair_ratio(double a_area, double b_area) {
  if (a_area < 0.0 || b_area < 0.0) {
    throw ValidationError("area_pair_ratio: negative area");
  }
  if (a_area == 0.0 && b_area == 0.0) {
    throw ValidationError("area_pair_ratio: both areas are zero");
  }
  return a_area / (a_area + b_area);
}

SlideFeatures compute_slide_features(const std::string& slide_id,
                                     const std::map<TileAddress, int>& assignments, int k,
                                     const TissueLabelGrid& grid, const CellMap& cells,
                                     double morisita_quadrat) {
  SlideFeatures out;
  out.slide_id = slide_id;

  const std::set<TileAddress> tissue = tissue_tiles(grid);
  const auto cf = cf_phenotype_ratios(assignments, tissue, k);
  out.cf_ratio.assign(k, 0.0);
  for (const auto& [p, v] : cf) out.cf_ratio[p] = v;

  out.ap_ratio = ap_phenotype_ratios(grid);

  try {
    out.morisita = morisita_index(cells, morisita_quadrat);
  } catch (const ValidationError&) {
    out.morisita.reset();  // one population absent: missing, not zero
  }

  double stroma = 0.0, tumor = 0.0, necrosis = 0.0;
  for (const auto& [addr, label] : grid.labels) {
    if (label == TissueCategory::Stroma) stroma += 1.0;
    if (label == TissueCategory::Tumor) tumor += 1.0;
    if (label == TissueCategory::Necrosis) necrosis += 1.0;
  }
  if (stroma + tumor > 0.0) out.stroma_tumor = area_pair_ratio(stroma, tumor);
  if (necrosis + tumor > 0.0) out.necrosis_tumor = area_pair_ratio(necrosis, tumor);
  return out;
}

std::vector<std::string> feature_table_columns(int k) {
  std::vector<std::string> cols{"slide_id"};
  for (int p = 0; p < k; ++p) cols.push_back("cf_ratio_" + std::to_string(p));
  for (const TissueCategory c : counted_tissue_categories()) {
    cols.push_back("ap_" + std::string(to_string(c)));
  }
  cols.push_back("morisita");
  cols.push_back("stroma_tumor");
  cols.push_back("necrosis_tumor");
  return cols;
}

std::string feature_table_csv(const std::vector<SlideFeatures>& slides, int k) {
  std::ostringstream out;
  const auto cols = feature_table_columns(k);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out << ',';
    out << cols[i];
  }
  out << '\n';
  const auto emit_optional = [&](const std::optional<double>& v) {
    out << ',';
    if (v) out << format_double(*v);
  };
  for (const SlideFeatures& s : slides) {
    if (static_cast<int>(s.cf_ratio.size()) != k) {
      throw ValidationError("feature_table_csv: slide row does not match k");
    }
    out << s.slide_id;
    for (int p = 0; p < k; ++p) out << ',' << format_double(s.cf_ratio[p]);
    for (const TissueCategory c : counted_tissue_categories()) {
      out << ',' << format_double(s.ap_ratio.at(c));
    }
    emit_optional(s.morisita);
    emit_optional(s.stroma_tumor);
    emit_optional(s.necrosis_tumor);
    out << '\n';
  }
  return out.str();
}

}  // namespace histopheno
