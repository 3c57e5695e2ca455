#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "histopheno/common.hpp"

namespace histopheno {

// The four cell classes: malignant epithelial, inflammatory, spindle-shaped,
// necrotic debris.
enum class CellClass : std::uint8_t { M = 0, I = 1, S = 2, N = 3 };

inline constexpr std::array<std::string_view, 4> kCellClassNames{"M", "I", "S", "N"};

CellClass parse_cell_class(std::string_view token, const std::string& where);
inline std::string_view to_string(CellClass c) { return kCellClassNames[static_cast<int>(c)]; }

struct CellRecord {
  double x = 0.0;  // micrometres
  double y = 0.0;
  CellClass cls = CellClass::M;
};

struct CellMap {
  std::string slide_id;
  std::vector<CellRecord> cells;
  double width = 0.0;   // extent in micrometres
  double height = 0.0;
};

// The nine appearance-based tissue categories.
enum class TissueCategory : std::uint8_t {
  Normal = 0,
  Background = 1,
  LooseConnective = 2,
  Fat = 3,
  Stroma = 4,
  Inflammation = 5,
  Necrosis = 6,
  SmoothMuscle = 7,
  Tumor = 8,
};

inline constexpr int kTissueCategoryCount = 9;
inline constexpr std::array<std::string_view, kTissueCategoryCount> kTissueCategoryNames{
    "normal",       "background", "loose_connective", "fat",  "stroma",
    "inflammation", "necrosis",   "smooth_muscle",    "tumor"};

TissueCategory parse_tissue_category(std::string_view token, const std::string& where);
inline std::string_view to_string(TissueCategory c) {
  return kTissueCategoryNames[static_cast<int>(c)];
}

struct TileAddress {
  std::int64_t row = 0;
  std::int64_t col = 0;
  auto operator<=>(const TileAddress&) const = default;
};

struct TissueLabelGrid {
  std::string slide_id;
  double tile_size = 200.0;  // micrometres
  std::map<TileAddress, TissueCategory> labels;
};

struct Tile {
  std::int64_t row = 0;
  std::int64_t col = 0;
  std::vector<CellRecord> cells;
  TileAddress address() const { return {row, col}; }
};

struct TileSet {
  std::string slide_id;
  double tile_size = 200.0;
  std::vector<Tile> tiles;  // sorted by (row, col); empty tiles omitted
};

// Cell CSV: optional comment `# extent_um=<W>x<H>`, header `x_um,y_um,class`.
// When slide_id is empty it is derived from the file name stem.
CellMap load_cell_map(const std::filesystem::path& path, std::string slide_id = "");

// Tissue-label CSV: header `row,col,label`; duplicate addresses are rejected.
TissueLabelGrid load_tissue_labels(const std::filesystem::path& path, double tile_size = 200.0,
                                   std::string slide_id = "");

// Assigns each cell to tile (floor(y/T), floor(x/T)); half-open bounds, so a
// cell sitting exactly on a grid line belongs to the higher-index tile.
TileSet tile_cells(const CellMap& map, double tile_size = 200.0);

// Writers for the same formats the loaders accept.
std::string cell_map_csv(const CellMap& map);
std::string tissue_labels_csv(const TissueLabelGrid& grid);

}  // namespace histopheno
