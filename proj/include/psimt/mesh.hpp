#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "psimt/errors.hpp"
#include "psimt/vec3.hpp"

namespace psimt {

namespace detail {

struct CellKey {
  int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  size_t operator()(const CellKey& k) const {
    size_t h = std::hash<int64_t>()(k.x);
    h = h * 1315423911u ^ std::hash<int64_t>()(k.y);
    h = h * 1315423911u ^ std::hash<int64_t>()(k.z);
    return h;
  }
};

// Uniform grid over a point set; supports expanding-shell nearest queries.
class PointGrid {
 public:
  PointGrid() = default;

  void build(const std::vector<Vec3>& pts, double cell_size) {
    points_ = pts;  // owned copy: the grid must survive moves of the source mesh
    cell_ = cell_size > 0 ? cell_size : 1.0;
    bins_.clear();
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) bins_[key(pts[i])].push_back(i);
  }

  // Indices of the k nearest points to x (by Euclidean distance), sorted.
  std::vector<int> nearest(const Vec3& x, int k) const {
    const auto& pts = points_;
    k = std::min<int>(k, static_cast<int>(pts.size()));
    std::vector<std::pair<double, int>> cand;
    const CellKey c = key(x);
    for (int ring = 0;; ++ring) {
      collect_ring(c, ring, x, cand);
      if (static_cast<int>(cand.size()) >= k) {
        std::nth_element(cand.begin(), cand.begin() + (k - 1), cand.end());
        const double dk = std::sqrt(cand[k - 1].first);
        // All points within dk are inside rings up to ceil(dk/cell)+1.
        const int needed = static_cast<int>(std::ceil(dk / cell_)) + 1;
        if (ring >= needed) break;
      }
      if (ring > max_ring_) {  // sparse region: brute force
        cand.clear();
        for (int i = 0; i < static_cast<int>(pts.size()); ++i)
          cand.push_back({norm2(pts[i] - x), i});
        break;
      }
    }
    const int n = std::min<int>(k, static_cast<int>(cand.size()));
    std::partial_sort(cand.begin(), cand.begin() + n, cand.end());
    std::vector<int> out(n);
    for (int i = 0; i < n; ++i) out[i] = cand[i].second;
    return out;
  }

  // All indices with |p - x| <= r.
  std::vector<int> within(const Vec3& x, double r) const {
    const auto& pts = points_;
    std::vector<int> out;
    const int rings = static_cast<int>(std::ceil(r / cell_)) + 1;
    const CellKey c = key(x);
    if (rings > max_ring_) {
      for (int i = 0; i < static_cast<int>(pts.size()); ++i)
        if (norm2(pts[i] - x) <= r * r) out.push_back(i);
      return out;
    }
    const double r2 = r * r;
    for (int dx = -rings; dx <= rings; ++dx)
      for (int dy = -rings; dy <= rings; ++dy)
        for (int dz = -rings; dz <= rings; ++dz) {
          auto it = bins_.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == bins_.end()) continue;
          for (int i : it->second)
            if (norm2(pts[i] - x) <= r2) out.push_back(i);
        }
    return out;
  }

 private:
  CellKey key(const Vec3& p) const {
    return {static_cast<int64_t>(std::floor(p.x / cell_)),
            static_cast<int64_t>(std::floor(p.y / cell_)),
            static_cast<int64_t>(std::floor(p.z / cell_))};
  }

  void collect_ring(const CellKey& c, int ring, const Vec3& x,
                    std::vector<std::pair<double, int>>& cand) const {
    const auto& pts = points_;
    for (int64_t dx = -ring; dx <= ring; ++dx)
      for (int64_t dy = -ring; dy <= ring; ++dy)
        for (int64_t dz = -ring; dz <= ring; ++dz) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) continue;
          auto it = bins_.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == bins_.end()) continue;
          for (int i : it->second) cand.push_back({norm2(pts[i] - x), i});
        }
  }

  std::vector<Vec3> points_;
  double cell_{1.0};
  static constexpr int max_ring_ = 16;
  std::unordered_map<CellKey, std::vector<int>, CellKeyHash> bins_;
};

}  // namespace detail

// Closest point on triangle (a,b,c) to p (Ericson, Real-Time Collision
// Detection, 5.1.5).
inline Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = dot(ab, ap), d2 = dot(ac, ap);
  if (d1 <= 0 && d2 <= 0) return a;
  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp), d4 = dot(ac, bp);
  if (d3 >= 0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + ab * (d1 / (d1 - d3));
  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp), d6 = dot(ac, cp);
  if (d6 >= 0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + ac * (d2 / (d2 - d6));
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return b + (c - b) * w;
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

// Closed, consistently oriented triangulated surface with outward normals.
struct TriangulatedSurface {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;

  // Derived, filled by validate():
  std::vector<Vec3> normals;      // unit outward
  std::vector<double> areas;
  std::vector<Vec3> centroids;
  std::vector<double> tri_diameters;  // longest edge per triangle
  double h{0};                    // max triangle diameter (longest edge)
  double total_area{0};
  double enclosed_volume{0};
  Vec3 center{};                  // area-weighted centroid of the surface
  double circumradius{0};         // max vertex distance from center

  detail::PointGrid centroid_grid;

  int num_triangles() const { return static_cast<int>(triangles.size()); }

  void validate() {
    if (triangles.empty()) throw OrientationError("surface has no triangles");
    // Every directed edge must appear exactly once and its reverse exactly once.
    std::map<std::pair<int, int>, int> directed;
    for (const auto& t : triangles) {
      for (int e = 0; e < 3; ++e) {
        const int a = t[e], b = t[(e + 1) % 3];
        if (++directed[{a, b}] > 1)
          throw OrientationError("surface not consistently oriented: repeated directed edge");
      }
    }
    for (const auto& [edge, count] : directed) {
      auto rev = directed.find({edge.second, edge.first});
      if (rev == directed.end())
        throw OrientationError("surface not closed: unmatched edge");
    }

    normals.resize(triangles.size());
    areas.resize(triangles.size());
    centroids.resize(triangles.size());
    tri_diameters.resize(triangles.size());
    h = 0;
    total_area = 0;
    enclosed_volume = 0;
    Vec3 csum{};
    for (size_t i = 0; i < triangles.size(); ++i) {
      const Vec3 &a = vertices[triangles[i][0]], &b = vertices[triangles[i][1]],
                 &c = vertices[triangles[i][2]];
      const Vec3 n = cross(b - a, c - a);
      const double area2 = norm(n);
      if (area2 <= 0) throw OrientationError("degenerate triangle");
      normals[i] = n / area2;
      areas[i] = 0.5 * area2;
      centroids[i] = (a + b + c) / 3.0;
      tri_diameters[i] = std::max({norm(b - a), norm(c - b), norm(a - c)});
      h = std::max(h, tri_diameters[i]);
      total_area += areas[i];
      enclosed_volume += dot(a, cross(b, c)) / 6.0;
      csum += centroids[i] * areas[i];
    }
    if (enclosed_volume <= 0)
      throw OrientationError("surface oriented inward: signed volume <= 0");
    center = csum / total_area;
    circumradius = 0;
    for (const auto& v : vertices) circumradius = std::max(circumradius, norm(v - center));

    // Divergence-theorem check on constant fields.
    Vec3 flux{};
    for (size_t i = 0; i < triangles.size(); ++i) flux += normals[i] * areas[i];
    if (norm(flux) > 1e-9 * total_area)
      throw OrientationError("sum of area-weighted normals does not vanish");

    centroid_grid.build(centroids, 2.0 * h);
  }
};

struct ClosestPointResult {
  Vec3 point;
  double distance;
  int triangle;
};

inline ClosestPointResult closest_point(const TriangulatedSurface& s, const Vec3& x) {
  // Nearest centroid bounds the search radius: the optimal triangle's
  // centroid lies within dist(x, Gamma) + h of x.
  auto seed = s.centroid_grid.nearest(x, 1);
  const double d_seed = norm(s.centroids[seed[0]] - x);
  auto cand = s.centroid_grid.within(x, d_seed + 1.5 * s.h);
  ClosestPointResult best{{}, std::numeric_limits<double>::max(), -1};
  for (int i : cand) {
    const auto& t = s.triangles[i];
    const Vec3 p = closest_point_on_triangle(x, s.vertices[t[0]], s.vertices[t[1]],
                                             s.vertices[t[2]]);
    const double d = norm(p - x);
    if (d < best.distance) best = {p, d, i};
  }
  return best;
}

// Volume mesh of the enclosed domain, paired with a TriangulatedSurface.
struct TetrahedralMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> cells;

  std::vector<double> volumes;
  std::vector<Vec3> centroids;
  double total_volume{0};
  double max_cell_diameter{0};

  int num_cells() const { return static_cast<int>(cells.size()); }

  static double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    return dot(b - a, cross(c - a, d - a)) / 6.0;
  }

  void validate() {
    volumes.resize(cells.size());
    centroids.resize(cells.size());
    total_volume = 0;
    max_cell_diameter = 0;
    for (size_t i = 0; i < cells.size(); ++i) {
      auto& c = cells[i];
      double v = signed_volume(vertices[c[0]], vertices[c[1]], vertices[c[2]], vertices[c[3]]);
      if (v < 0) {
        std::swap(c[2], c[3]);
        v = -v;
      }
      if (v <= 0) throw DegenerateMesh("tetrahedron with zero volume");
      volumes[i] = v;
      centroids[i] = (vertices[c[0]] + vertices[c[1]] + vertices[c[2]] + vertices[c[3]]) / 4.0;
      total_volume += v;
      for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
          max_cell_diameter = std::max(max_cell_diameter, norm(vertices[c[a]] - vertices[c[b]]));
    }
  }
};

namespace detail {

inline TriangulatedSurface base_icosahedron() {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  TriangulatedSurface s;
  s.vertices = {{-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
                {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
                {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : s.vertices) v = normalized(v);
  s.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                 {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                 {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                 {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  return s;
}

inline void subdivide_project_unit(TriangulatedSurface& s) {
  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    auto key = std::minmax(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const int idx = static_cast<int>(s.vertices.size());
    s.vertices.push_back(normalized((s.vertices[a] + s.vertices[b]) * 0.5));
    midpoint[key] = idx;
    return idx;
  };
  std::vector<std::array<int, 3>> fine;
  fine.reserve(s.triangles.size() * 4);
  for (const auto& t : s.triangles) {
    const int m01 = mid(t[0], t[1]), m12 = mid(t[1], t[2]), m20 = mid(t[2], t[0]);
    fine.push_back({t[0], m01, m20});
    fine.push_back({t[1], m12, m01});
    fine.push_back({t[2], m20, m12});
    fine.push_back({m01, m12, m20});
  }
  s.triangles = std::move(fine);
}

}  // namespace detail

// Unit icosphere (centered at origin, radius 1), 20 * 4^level triangles.
inline TriangulatedSurface make_icosphere(int level) {
  TriangulatedSurface s = detail::base_icosahedron();
  for (int l = 0; l < level; ++l) detail::subdivide_project_unit(s);
  return s;
}

// Radial extrusion of a star-shaped surface (w.r.t. `apex`) into tetrahedra
// with level+1 radial layers. Each prism between consecutive shells splits
// into 3 tets; the innermost shell connects to the apex.
inline TetrahedralMesh extrude_to_tets(const TriangulatedSurface& surf, const Vec3& apex,
                                       int radial_layers) {
  const int nv = static_cast<int>(surf.vertices.size());
  const int L = std::max(1, radial_layers);
  TetrahedralMesh m;
  m.vertices.push_back(apex);
  for (int l = 1; l <= L; ++l) {
    const double s = static_cast<double>(l) / L;
    for (const auto& v : surf.vertices) m.vertices.push_back(apex + (v - apex) * s);
  }
  auto shell = [nv](int layer, int v) { return 1 + (layer - 1) * nv + v; };
  for (const auto& t : surf.triangles) {
    m.cells.push_back({0, shell(1, t[0]), shell(1, t[1]), shell(1, t[2])});
    for (int l = 1; l < L; ++l) {
      const int b0 = shell(l, t[0]), b1 = shell(l, t[1]), b2 = shell(l, t[2]);
      const int t0 = shell(l + 1, t[0]), t1 = shell(l + 1, t[1]), t2 = shell(l + 1, t[2]);
      m.cells.push_back({b0, b1, b2, t2});
      m.cells.push_back({b0, b1, t2, t1});
      m.cells.push_back({b0, t1, t2, t0});
    }
  }
  m.validate();
  return m;
}

struct MeshedDomain {
  TriangulatedSurface surface;
  TetrahedralMesh volume;
};

inline MeshedDomain make_sphere(const Vec3& center, double radius, int level) {
  TriangulatedSurface s = make_icosphere(level);
  for (auto& v : s.vertices) v = center + v * radius;
  s.validate();
  MeshedDomain d;
  d.volume = extrude_to_tets(s, center, level + 1);
  d.surface = std::move(s);
  return d;
}

inline MeshedDomain make_ellipsoid(const Vec3& semi_axes, int level) {
  TriangulatedSurface s = make_icosphere(level);
  for (auto& v : s.vertices) v = {v.x * semi_axes.x, v.y * semi_axes.y, v.z * semi_axes.z};
  s.validate();
  MeshedDomain d;
  d.volume = extrude_to_tets(s, Vec3{0, 0, 0}, level + 1);
  d.surface = std::move(s);
  return d;
}

// Low-regularity variant: displace vertices by a seeded random offset of
// magnitude <= amplitude * h, then revalidate.
inline TriangulatedSurface jitter_vertices(TriangulatedSurface s, double amplitude,
                                           unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double amp = amplitude * s.h;
  for (auto& v : s.vertices) v += Vec3{u(rng), u(rng), u(rng)} * amp;
  s.validate();
  return s;
}

// ---- OFF / TET file formats (ASCII) ----

inline void save_off(const TriangulatedSurface& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for writing: " + path, 0);
  out << "OFF\n" << s.vertices.size() << " " << s.triangles.size() << " 0\n";
  out.precision(17);
  for (const auto& v : s.vertices) out << v.x << " " << v.y << " " << v.z << "\n";
  for (const auto& t : s.triangles) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
}

inline TriangulatedSurface load_off(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open: " + path, 0);
  std::string line;
  int lineno = 0;
  auto next_line = [&]() -> std::string {
    while (std::getline(in, line)) {
      ++lineno;
      const auto pos = line.find_first_not_of(" \t\r");
      if (pos == std::string::npos || line[pos] == '#') continue;
      return line;
    }
    throw ParseError("unexpected end of OFF file", lineno);
  };
  if (next_line().substr(0, 3) != "OFF") throw ParseError("missing OFF header", lineno);
  std::istringstream counts(next_line());
  size_t nv = 0, nf = 0, ne = 0;
  if (!(counts >> nv >> nf >> ne)) throw ParseError("bad OFF counts line", lineno);
  TriangulatedSurface s;
  s.vertices.resize(nv);
  for (size_t i = 0; i < nv; ++i) {
    std::istringstream ls(next_line());
    if (!(ls >> s.vertices[i].x >> s.vertices[i].y >> s.vertices[i].z))
      throw ParseError("bad vertex line", lineno);
  }
  s.triangles.resize(nf);
  for (size_t i = 0; i < nf; ++i) {
    std::istringstream ls(next_line());
    int n = 0;
    if (!(ls >> n) || n != 3) throw ParseError("only triangular faces supported", lineno);
    if (!(ls >> s.triangles[i][0] >> s.triangles[i][1] >> s.triangles[i][2]))
      throw ParseError("bad face line", lineno);
    for (int v : s.triangles[i])
      if (v < 0 || v >= static_cast<int>(nv)) throw ParseError("face index out of range", lineno);
  }
  s.validate();
  return s;
}

inline void save_tet(const TetrahedralMesh& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for writing: " + path, 0);
  out << "TET\n" << m.vertices.size() << " " << m.cells.size() << "\n";
  out.precision(17);
  for (const auto& v : m.vertices) out << v.x << " " << v.y << " " << v.z << "\n";
  for (const auto& c : m.cells) out << c[0] << " " << c[1] << " " << c[2] << " " << c[3] << "\n";
}

inline TetrahedralMesh load_tet(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open: " + path, 0);
  std::string header;
  if (!(in >> header) || header != "TET") throw ParseError("missing TET header", 1);
  size_t nv = 0, nc = 0;
  if (!(in >> nv >> nc)) throw ParseError("bad TET counts", 2);
  TetrahedralMesh m;
  m.vertices.resize(nv);
  for (size_t i = 0; i < nv; ++i)
    if (!(in >> m.vertices[i].x >> m.vertices[i].y >> m.vertices[i].z))
      throw ParseError("bad TET vertex", static_cast<int>(3 + i));
  m.cells.resize(nc);
  for (size_t i = 0; i < nc; ++i)
    for (int k = 0; k < 4; ++k)
      if (!(in >> m.cells[i][k]) || m.cells[i][k] < 0 || m.cells[i][k] >= static_cast<int>(nv))
        throw ParseError("bad TET cell", static_cast<int>(3 + nv + i));
  m.validate();
  return m;
}

// Near-uniform point set on a sphere (golden-angle spiral); used for probe
// placement.
inline std::vector<Vec3> fibonacci_sphere(int n, const Vec3& center, double radius) {
  std::vector<Vec3> pts(n);
  const double ga = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = ga * i;
    pts[i] = center + Vec3{r * std::cos(phi), r * std::sin(phi), z} * radius;
  }
  return pts;
}

}  // namespace psimt
