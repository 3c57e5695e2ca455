#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "histopheno/cellmap.hpp"
#include "histopheno/common.hpp"

namespace histopheno {

// Categories counted toward tissue area (everything except normal, fat and
// non-tissue background).
bool is_tissue_category(TissueCategory c);
std::vector<TissueCategory> counted_tissue_categories();

// Addresses whose label is a tissue category; defines "total tissue area"
// in tile units.
std::set<TileAddress> tissue_tiles(const TissueLabelGrid& grid);

// ratio_p = |tissue tiles assigned p| / |tissue tiles|. Unphenotyped tissue
// tiles count in the denominator only. Throws on an empty tissue set.
std::map<int, double> cf_phenotype_ratios(const std::map<TileAddress, int>& assignments,
                                          const std::set<TileAddress>& tissue, int k);

// ratio_c = |tiles labeled c| / |tissue tiles| for each counted category.
std::map<TissueCategory, double> ap_phenotype_ratios(const TissueLabelGrid& grid);

// Morisita-Horn overlap between the quadrat count distributions of
// inflammatory (I) and malignant epithelial (M) cells. Quadrats tile the
// slide extent. Throws when either population is absent.
double morisita_index(const CellMap& map, double quadrat_size = 200.0);

// a / (a + b); used as stroma/(stroma+tumor) and necrosis/(necrosis+tumor).
double area_pair_ratio(double a_area, double b_area);

// Slide-level phenotypic signature. Undefined ratios propagate as missing.
struct SlideFeatures {
  std::string slide_id;
  std::vector<double> cf_ratio;  // per phenotype index, size k
  std::map<TissueCategory, double> ap_ratio;
  std::optional<double> morisita;
  std::optional<double> stroma_tumor;
  std::optional<double> necrosis_tumor;
};

SlideFeatures compute_slide_features(const std::string& slide_id,
                                     const std::map<TileAddress, int>& assignments, int k,
                                     const TissueLabelGrid& grid, const CellMap& cells,
                                     double morisita_quadrat = 200.0);

// Column order of the feature table CSV.
std::vector<std::string> feature_table_columns(int k);
std::string feature_table_csv(const std::vector<SlideFeatures>& slides, int k);

}  // namespace histopheno
