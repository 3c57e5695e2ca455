#include "histopheno/cellmap.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "histopheno/csv.hpp"

namespace histopheno {

CellClass parse_cell_class(std::string_view token, const std::string& where) {
  for (std::size_t i = 0; i < kCellClassNames.size(); ++i) {
    if (token == kCellClassNames[i]) return static_cast<CellClass>(i);
  }
  throw ParseError(where + ": unknown cell class '" + std::string(token) + "'");
}

TissueCategory parse_tissue_category(std::string_view token, const std::string& where) {
  for (int i = 0; i < kTissueCategoryCount; ++i) {
    if (token == kTissueCategoryNames[i]) return static_cast<TissueCategory>(i);
  }
  throw ParseError(where + ": unknown tissue category '" + std::string(token) + "'");
}

namespace {

std::string slide_id_from_path(const std::filesystem::path& path) {
  std::string stem = path.stem().string();
  // Strip a trailing role suffix from the pipeline naming convention
  // (<slide>.cells.csv, <slide>.labels.csv).
  for (std::string_view suffix : {".cells", ".labels"}) {
    if (stem.size() > suffix.size() && stem.ends_with(suffix)) {
      stem.resize(stem.size() - suffix.size());
    }
  }
  return stem;
}

std::string at_line(const std::string& path, std::size_t line) {
  std::ostringstream s;
  s << path << ":" << line;
  return s.str();
}

}  // namespace

CellMap load_cell_map(const std::filesystem::path& path, std::string slide_id) {
  const CsvTable table = read_csv(path);
  const int col_x = table.require_column("x_um");
  const int col_y = table.require_column("y_um");
  const int col_class = table.require_column("class");

  CellMap map;
  map.slide_id = slide_id.empty() ? slide_id_from_path(path) : std::move(slide_id);
  if (map.slide_id.empty()) throw ValidationError(table.path + ": empty slide id");

  bool declared_extent = false;
  for (const std::string& comment : table.comments) {
    constexpr std::string_view key = "extent_um=";
    if (!comment.starts_with(key)) continue;
    const std::string value = comment.substr(key.size());
    const std::size_t sep = value.find('x');
    if (sep == std::string::npos) {
      throw ParseError(table.path + ": malformed extent comment '" + comment + "'");
    }
    map.width = parse_double(value.substr(0, sep), table.path + ": extent width");
    map.height = parse_double(value.substr(sep + 1), table.path + ": extent height");
    if (map.width < 0.0 || map.height < 0.0) {
      throw ValidationError(table.path + ": negative declared extent");
    }
    declared_extent = true;
  }

  map.cells.reserve(table.rows.size());
  double max_x = 0.0;
  double max_y = 0.0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string where = at_line(table.path, table.row_lines[r]);
    CellRecord cell;
    cell.x = parse_double(table.rows[r][col_x], where);
    cell.y = parse_double(table.rows[r][col_y], where);
    cell.cls = parse_cell_class(table.rows[r][col_class], where);
    if (!std::isfinite(cell.x) || !std::isfinite(cell.y)) {
      throw ValidationError(where + ": non-finite coordinate");
    }
    if (cell.x < 0.0 || cell.y < 0.0) {
      throw ValidationError(where + ": negative coordinate");
    }
    if (declared_extent && (cell.x > map.width || cell.y > map.height)) {
      throw ValidationError(where + ": cell outside declared extent");
    }
    max_x = std::max(max_x, cell.x);
    max_y = std::max(max_y, cell.y);
    map.cells.push_back(cell);
  }
  if (!declared_extent) {
    map.width = max_x;
    map.height = max_y;
  }
  return map;
}

TissueLabelGrid load_tissue_labels(const std::filesystem::path& path, double tile_size,
                                   std::string slide_id) {
  if (tile_size <= 0.0) throw ValidationError("load_tissue_labels: tile_size must be positive");
  const CsvTable table = read_csv(path);
  const int col_row = table.require_column("row");
  const int col_col = table.require_column("col");
  const int col_label = table.require_column("label");

  TissueLabelGrid grid;
  grid.slide_id = slide_id.empty() ? slide_id_from_path(path) : std::move(slide_id);
  grid.tile_size = tile_size;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string where = at_line(table.path, table.row_lines[r]);
    TileAddress addr;
    addr.row = parse_int(table.rows[r][col_row], where);
    addr.col = parse_int(table.rows[r][col_col], where);
    if (addr.row < 0 || addr.col < 0) {
      throw ValidationError(where + ": negative tile address");
    }
    const TissueCategory label = parse_tissue_category(table.rows[r][col_label], where);
    const auto [it, inserted] = grid.labels.emplace(addr, label);
    if (!inserted) {
      std::ostringstream msg;
      msg << where << ": duplicate tile address (" << addr.row << "," << addr.col << ")";
      throw ValidationError(msg.str());
    }
  }
  return grid;
}

std::string cell_map_csv(const CellMap& map) {
  std::ostringstream out;
  out << "# extent_um=" << format_double(map.width) << 'x' << format_double(map.height) << '\n';
  out << "x_um,y_um,class\n";
  for (const CellRecord& cell : map.cells) {
    out << format_double(cell.x) << ',' << format_double(cell.y) << ',' << to_string(cell.cls)
        << '\n';
  }
  return out.str();
}

std::string tissue_labels_csv(const TissueLabelGrid& grid) {
  std::ostringstream out;
  out << "row,col,label\n";
  for (const auto& [addr, label] : grid.labels) {
    out << addr.row << ',' << addr.col << ',' << to_string(label) << '\n';
  }
  return out.str();
}

TileSet tile_cells(const CellMap& map, double tile_size) {
  if (tile_size <= 0.0) throw ValidationError("tile_cells: tile_size must be positive");
  std::map<TileAddress, std::vector<CellRecord>> buckets;
  for (const CellRecord& cell : map.cells) {
    TileAddress addr;
    addr.row = static_cast<std::int64_t>(std::floor(cell.y / tile_size));
    addr.col = static_cast<std::int64_t>(std::floor(cell.x / tile_size));
    buckets[addr].push_back(cell);
  }
  TileSet set;
  set.slide_id = map.slide_id;
  set.tile_size = tile_size;
  set.tiles.reserve(buckets.size());
  for (auto& [addr, cells] : buckets) {
    Tile tile;
    tile.row = addr.row;
    tile.col = addr.col;
    tile.cells = std::move(cells);
    set.tiles.push_back(std::move(tile));
  }
  return set;
}

}  // namespace histopheno
