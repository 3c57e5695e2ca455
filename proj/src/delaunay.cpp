#include <algorithm>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "histopheno/cellgraph.hpp"

namespace histopheno {

namespace {

int sign_ld(long double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

// Cross product of (a-o) and (b-o).
long double cross_ld(const Point& o, const Point& a, const Point& b) {
  const long double ax = static_cast<long double>(a.x) - o.x;
  const long double ay = static_cast<long double>(a.y) - o.y;
  const long double bx = static_cast<long double>(b.x) - o.x;
  const long double by = static_cast<long double>(b.y) - o.y;
  return ax * by - ay * bx;
}

// Lexicographic (x, y, index) key; the perturbation rank of a point.
bool perturb_less(const std::vector<Point>& pts, int i, int j) {
  const Point& p = pts[i];
  const Point& q = pts[j];
  if (p.x != q.x) return p.x < q.x;
  if (p.y != q.y) return p.y < q.y;
  return i < j;
}

}  // namespace

int orient_sign(const std::vector<Point>& pts, int ia, int ib, int ic) {
  // Evaluate in ascending index order so the floating-point result is
  // identical for every argument permutation of the same triple.
  int v[3] = {ia, ib, ic};
  int parity = 1;
  for (int i = 1; i < 3; ++i) {
    for (int j = i; j > 0 && v[j - 1] > v[j]; --j) {
      std::swap(v[j - 1], v[j]);
      parity = -parity;
    }
  }
  return parity * sign_ld(cross_ld(pts[v[0]], pts[v[1]], pts[v[2]]));
}

int incircle_sign(const std::vector<Point>& pts, int ia, int ib, int ic, int id) {
  int v[4] = {ia, ib, ic, id};
  int parity = 1;
  for (int i = 1; i < 4; ++i) {
    for (int j = i; j > 0 && v[j - 1] > v[j]; --j) {
      std::swap(v[j - 1], v[j]);
      parity = -parity;
    }
  }
  if (v[0] == v[1] || v[1] == v[2] || v[2] == v[3]) {
    throw ValidationError("incircle_sign: repeated point index");
  }
  const Point& a = pts[v[0]];
  const Point& b = pts[v[1]];
  const Point& c = pts[v[2]];
  const Point& d = pts[v[3]];

  const long double adx = static_cast<long double>(a.x) - d.x;
  const long double ady = static_cast<long double>(a.y) - d.y;
  const long double bdx = static_cast<long double>(b.x) - d.x;
  const long double bdy = static_cast<long double>(b.y) - d.y;
  const long double cdx = static_cast<long double>(c.x) - d.x;
  const long double cdy = static_cast<long double>(c.y) - d.y;
  const long double ad2 = adx * adx + ady * ady;
  const long double bd2 = bdx * bdx + bdy * bdy;
  const long double cd2 = cdx * cdx + cdy * cdy;

  const long double det = adx * (bdy * cd2 - cdy * bd2) - ady * (bdx * cd2 - cdx * bd2) +
                          ad2 * (bdx * cdy - cdx * bdy);
  if (det != 0.0L) return parity * sign_ld(det);

  // Cocircular. The determinant of the lifted points is linear in each z
  // coordinate, so perturbing z_p by an infinitesimal eps_p adds
  // eps_p * cofactor_p. Distinct infinitesimal orders, ranked by the
  // (x, y, index) key (smallest key strongest), make the sign of the first
  // nonzero cofactor decisive.
  long double coef[4];
  coef[0] = cross_ld(d, b, c);
  coef[1] = -cross_ld(d, a, c);
  coef[2] = cross_ld(d, a, b);
  coef[3] = -(coef[0] + coef[1] + coef[2]);

  int order[4] = {0, 1, 2, 3};
  std::sort(order, order + 4,
            [&](int lhs, int rhs) { return perturb_less(pts, v[lhs], v[rhs]); });
  for (int k = 0; k < 4; ++k) {
    if (coef[order[k]] != 0.0L) return parity * sign_ld(coef[order[k]]);
  }
  throw NumericError("incircle_sign: fully degenerate configuration");
}

namespace {

constexpr int kInfinite = -1;

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a + 1)) << 32) |
         static_cast<std::uint32_t>(b + 1);
}

// Incremental construction with an explicit vertex at infinity: the plane is
// tiled by finite CCW triangles plus one infinite triangle per hull edge, so
// cavity boundaries close without super-triangle coordinates.
class Builder {
 public:
  explicit Builder(const std::vector<Point>& pts) : pts_(pts) {}

  void init(int a, int b, int c) {
    if (orient_sign(pts_, a, b, c) < 0) std::swap(b, c);
    add_triangle(a, b, c);
    add_triangle(b, a, kInfinite);
    add_triangle(c, b, kInfinite);
    add_triangle(a, c, kInfinite);
  }

  void insert(int p) {
    int seed = -1;
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
      if (alive_[t] && conflicts(t, p)) {
        seed = t;
        break;
      }
    }
    if (seed < 0) throw NumericError("delaunay: inserted point conflicts with no triangle");

    // Flood the conflict region through shared edges.
    std::vector<int> cavity;
    std::vector<int> stack{seed};
    in_cavity_.assign(tris_.size(), false);
    in_cavity_[seed] = true;
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      cavity.push_back(t);
      const auto& tri = tris_[t];
      for (int e = 0; e < 3; ++e) {
        const int n = neighbor(tri[(e + 1) % 3], tri[e]);
        if (!in_cavity_[n] && conflicts(n, p)) {
          in_cavity_[n] = true;
          stack.push_back(n);
        }
      }
    }

    std::vector<std::pair<int, int>> boundary;
    for (const int t : cavity) {
      const auto& tri = tris_[t];
      for (int e = 0; e < 3; ++e) {
        const int ea = tri[e];
        const int eb = tri[(e + 1) % 3];
        if (!in_cavity_[neighbor(eb, ea)]) boundary.emplace_back(ea, eb);
      }
    }

    for (const int t : cavity) remove_triangle(t);
    for (const auto& [ea, eb] : boundary) add_triangle(ea, eb, p);

    // Every directed edge of the rebuilt fan must have its reverse present,
    // otherwise the predicates produced an unrealizable cavity.
    for (const auto& [ea, eb] : boundary) {
      if (!edge_tri_.count(edge_key(eb, ea)) || !edge_tri_.count(edge_key(p, ea)) ||
          !edge_tri_.count(edge_key(eb, p))) {
        throw NumericError("delaunay: inconsistent cavity boundary");
      }
    }
  }

  EdgeSet finite_edges() const {
    EdgeSet out;
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      if (!alive_[t]) continue;
      const auto& tri = tris_[t];
      for (int e = 0; e < 3; ++e) {
        const int a = tri[e];
        const int b = tri[(e + 1) % 3];
        if (a == kInfinite || b == kInfinite) continue;
        if (a < b) out.edges.emplace_back(a, b);
      }
    }
    std::sort(out.edges.begin(), out.edges.end());
    out.edges.erase(std::unique(out.edges.begin(), out.edges.end()), out.edges.end());
    return out;
  }

 private:
  void add_triangle(int a, int b, int c) {
    const int id = static_cast<int>(tris_.size());
    tris_.push_back({a, b, c});
    alive_.push_back(true);
    in_cavity_.push_back(false);
    edge_tri_[edge_key(a, b)] = id;
    edge_tri_[edge_key(b, c)] = id;
    edge_tri_[edge_key(c, a)] = id;
  }

  void remove_triangle(int t) {
    const auto& tri = tris_[t];
    for (int e = 0; e < 3; ++e) {
      const auto it = edge_tri_.find(edge_key(tri[e], tri[(e + 1) % 3]));
      if (it != edge_tri_.end() && it->second == t) edge_tri_.erase(it);
    }
    alive_[t] = false;
  }

  int neighbor(int a, int b) const {
    const auto it = edge_tri_.find(edge_key(a, b));
    if (it == edge_tri_.end()) throw NumericError("delaunay: missing edge adjacency");
    return it->second;
  }

  // Collinear helper for hull-line queries: p strictly inside segment (a,b).
  bool strictly_within_segment(int a, int b, int p) const {
    const Point& pa = pts_[a];
    const Point& pb = pts_[b];
    const Point& pp = pts_[p];
    if (pa.x != pb.x) {
      return (std::min(pa.x, pb.x) < pp.x) && (pp.x < std::max(pa.x, pb.x));
    }
    return (std::min(pa.y, pb.y) < pp.y) && (pp.y < std::max(pa.y, pb.y));
  }

  bool conflicts(int t, int p) const {
    auto tri = tris_[t];
    int inf_pos = -1;
    for (int e = 0; e < 3; ++e) {
      if (tri[e] == kInfinite) inf_pos = e;
    }
    if (inf_pos < 0) return incircle_sign(pts_, tri[0], tri[1], tri[2], p) > 0;
    // Rotate to (x, y, inf); (x, y) runs opposite to the hull edge, so the
    // outside halfplane is strictly to its left.
    const int x = tri[(inf_pos + 1) % 3];
    const int y = tri[(inf_pos + 2) % 3];
    const int o = orient_sign(pts_, x, y, p);
    if (o > 0) return true;
    return o == 0 && strictly_within_segment(x, y, p);
  }

  const std::vector<Point>& pts_;
  std::vector<std::array<int, 3>> tris_;
  std::vector<bool> alive_;
  std::vector<bool> in_cavity_;
  std::unordered_map<std::uint64_t, int> edge_tri_;
};

}  // namespace

EdgeSet delaunay(const std::vector<Point>& points) {
  const int n = static_cast<int>(points.size());
  if (n < 3) throw ValidationError("delaunay: degenerate geometry, fewer than 3 points");

  {
    std::vector<int> order(points.size());
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int i, int j) {
      if (points[i].x != points[j].x) return points[i].x < points[j].x;
      return points[i].y < points[j].y;
    });
    for (int i = 1; i < n; ++i) {
      if (points[order[i - 1]].x == points[order[i]].x &&
          points[order[i - 1]].y == points[order[i]].y) {
        throw ValidationError("delaunay: duplicate points");
      }
    }
  }

  int third = -1;
  for (int k = 2; k < n; ++k) {
    if (orient_sign(points, 0, 1, k) != 0) {
      third = k;
      break;
    }
  }
  if (third < 0) throw ValidationError("delaunay: degenerate geometry, all points collinear");

  Builder builder(points);
  builder.init(0, 1, third);
  for (int k = 2; k < n; ++k) {
    if (k == third) continue;
    builder.insert(k);
  }
  return builder.finite_edges();
}

}  // namespace histopheno
