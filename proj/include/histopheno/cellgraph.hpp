#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "histopheno/cellmap.hpp"
#include "histopheno/common.hpp"

namespace histopheno {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Orientation of c relative to the directed line a->b: +1 left, -1 right,
// 0 collinear. Arguments are indices into pts; the evaluation is
// canonicalized over index order so every caller sees one consistent sign
// for the same triple.
int orient_sign(const std::vector<Point>& pts, int ia, int ib, int ic);

// Sign of the incircle determinant for (a,b,c) against query d, where a
// counterclockwise (a,b,c) and a positive result mean d lies strictly inside
// the circumcircle. Exact cocircularity is resolved by a symbolic
// perturbation of the lifted paraboloid coordinates ordered by (x, y, index),
// so the result is never 0 for four distinct points spanning a proper
// triangle. This single predicate defines the tie-break shared by the
// triangulation and any independent reconstruction of it.
int incircle_sign(const std::vector<Point>& pts, int ia, int ib, int ic, int id);

// Undirected edge list of one tile's cell network. Endpoints index the point
// list handed to delaunay(); pairs are stored (low, high) and sorted.
struct EdgeSet {
  std::vector<std::pair<int, int>> edges;
};

// Delaunay triangulation under the empty-circumcircle criterion with the
// perturbation tie-break above. Throws ValidationError on fewer than 3
// points, duplicate points, or all-collinear input.
EdgeSet delaunay(const std::vector<Point>& points);

// Unordered class pairs in fixed order: MM, MI, MS, MN, II, IS, IN, SS, SN, NN.
inline constexpr int kPairCount = 10;
inline constexpr std::array<std::string_view, kPairCount> kPairNames{
    "MM", "MI", "MS", "MN", "II", "IS", "IN", "SS", "SN", "NN"};

int pair_index(CellClass a, CellClass b);

// Ten-dimensional cell-cell connection frequency histogram of one tile.
struct CFVector {
  std::array<double, kPairCount> h{};
  std::int64_t edge_count = 0;

  bool operator==(const CFVector&) const = default;
};

// Normalized histogram of edge class pairs; an M-I edge increments (M,I)
// regardless of endpoint order. Zero edges yields the all-zero vector.
CFVector connection_frequency(const std::vector<CellClass>& classes, const EdgeSet& edges);

// d(h,m) = sum_k (h_k - m_k)^2 / (h_k + m_k), with 0/0 terms counting as 0.
// In [0, 2] for a pair of frequency vectors.
double chi_squared_distance(const std::array<double, kPairCount>& h,
                            const std::array<double, kPairCount>& m);
double chi_squared_distance(const CFVector& h, const CFVector& m);

// One tile prepared for triangulation: exact coordinate duplicates collapsed
// to the lowest-index cell's class.
struct TileSites {
  std::vector<Point> points;
  std::vector<CellClass> classes;
  int duplicates_collapsed = 0;
};

TileSites tile_sites(const Tile& tile);

// Full per-tile graph pass: dedupe, triangulate, count. Returns nullopt for
// tiles that cannot be triangulated (fewer than 3 distinct cells, or all
// collinear); such tiles stay unphenotyped.
struct TileGraph {
  TileSites sites;
  EdgeSet edges;
  CFVector cf;
};

std::optional<TileGraph> build_tile_graph(const Tile& tile);

}  // namespace histopheno
