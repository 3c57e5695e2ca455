#include "histopheno/cellgraph.hpp"

#include <cmath>
#include <map>
#include <utility>

namespace histopheno {

int pair_index(CellClass a, CellClass b) {
  static constexpr int offset[4] = {0, 4, 7, 9};
  int i = static_cast<int>(a);
  int j = static_cast<int>(b);
  if (i > j) std::swap(i, j);
  return offset[i] + (j - i);
}

CFVector connection_frequency(const std::vector<CellClass>& classes, const EdgeSet& edges) {
  CFVector cf;
  cf.edge_count = static_cast<std::int64_t>(edges.edges.size());
  if (cf.edge_count == 0) return cf;
  const int n = static_cast<int>(classes.size());
  for (const auto& [a, b] : edges.edges) {
    if (a < 0 || b < 0 || a >= n || b >= n) {
      throw ValidationError("connection_frequency: edge endpoint out of range");
    }
    cf.h[pair_index(classes[a], classes[b])] += 1.0;
  }
  for (double& v : cf.h) v /= static_cast<double>(cf.edge_count);
  return cf;
}

double chi_squared_distance(const std::array<double, kPairCount>& h,
                            const std::array<double, kPairCount>& m) {
  double sum = 0.0;
  for (int k = 0; k < kPairCount; ++k) {
    if (h[k] < 0.0 || m[k] < 0.0) {
      throw ValidationError("chi_squared_distance: negative entry");
    }
    const double denom = h[k] + m[k];
    if (denom == 0.0) continue;  // 0/0 counts as 0
    const double diff = h[k] - m[k];
    sum += diff * diff / denom;
  }
  return sum;
}

double chi_squared_distance(const CFVector& h, const CFVector& m) {
  return chi_squared_distance(h.h, m.h);
}

TileSites tile_sites(const Tile& tile) {
  TileSites sites;
  sites.points.reserve(tile.cells.size());
  sites.classes.reserve(tile.cells.size());
  std::map<std::pair<double, double>, int> seen;
  for (const CellRecord& cell : tile.cells) {
    const auto [it, inserted] = seen.emplace(std::make_pair(cell.x, cell.y),
                                             static_cast<int>(sites.points.size()));
    if (!inserted) {
      ++sites.duplicates_collapsed;  // first occurrence keeps its class
      continue;
    }
    sites.points.push_back({cell.x, cell.y});
    sites.classes.push_back(cell.cls);
  }
  return sites;
}

std::optional<TileGraph> build_tile_graph(const Tile& tile) {
  TileGraph graph;
  graph.sites = tile_sites(tile);
  if (graph.sites.points.size() < 3) return std::nullopt;
  try {
    graph.edges = delaunay(graph.sites.points);
  } catch (const ValidationError&) {
    return std::nullopt;  // collinear tile, stays unphenotyped
  }
  graph.cf = connection_frequency(graph.sites.classes, graph.edges);
  return graph;
}

}  // namespace histopheno
