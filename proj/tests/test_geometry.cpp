#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <numbers>

#include "psimt/mesh.hpp"

using namespace psimt;

namespace {
const double kPi = std::numbers::pi;

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) {
    path = (std::filesystem::temp_directory_path() / name).string();
  }
  ~TempFile() { std::remove(path.c_str()); }
};
}  // namespace

TEST_CASE("icosphere area and volume convergence") {
  auto d0 = make_sphere({0, 0, 0}, 1.0, 0);
  CHECK(d0.surface.num_triangles() == 20);
  // An icosahedron with vertices on the unit sphere has area 20*(sqrt(3)/4)*a^2
  // with edge a = 1/sin(2*pi/5), i.e. ~9.5745, 23.8% below 4*pi.
  CHECK(d0.surface.total_area == Catch::Approx(4 * kPi).epsilon(0.25));
  CHECK(d0.surface.total_area == Catch::Approx(9.5745).epsilon(1e-3));

  auto d3 = make_sphere({0, 0, 0}, 1.0, 3);
  CHECK(d3.surface.num_triangles() == 20 * 64);
  CHECK(d3.surface.total_area == Catch::Approx(4 * kPi).epsilon(0.005));
  CHECK(d3.surface.enclosed_volume == Catch::Approx(4.0 / 3.0 * kPi).epsilon(0.01));

  // refinement convergence: errors shrink by >= 3x per level
  double prev_area_err = -1, prev_vol_err = -1;
  for (int level = 0; level <= 3; ++level) {
    auto d = make_sphere({0, 0, 0}, 1.0, level);
    const double ae = std::abs(d.surface.total_area - 4 * kPi);
    const double ve = std::abs(d.surface.enclosed_volume - 4.0 / 3.0 * kPi);
    if (level > 0) {
      CHECK(prev_area_err / ae >= 3.0);
      CHECK(prev_vol_err / ve >= 3.0);
    }
    prev_area_err = ae;
    prev_vol_err = ve;
  }
}

TEST_CASE("surface invariants") {
  auto d = make_sphere({0.5, -1.0, 2.0}, 1.5, 2);
  const auto& s = d.surface;

  // sum of area-weighted normals vanishes (closed surface)
  Vec3 sum{0, 0, 0};
  for (int t = 0; t < s.num_triangles(); ++t) sum += s.normals[t] * s.areas[t];
  CHECK(norm(sum) < 1e-9 * s.total_area);

  // each normal equals the normalized edge cross product, outward
  for (int t = 0; t < s.num_triangles(); t += 97) {
    const auto& tri = s.triangles[t];
    Vec3 n = cross(s.vertices[tri[1]] - s.vertices[tri[0]], s.vertices[tri[2]] - s.vertices[tri[0]]);
    CHECK(norm(normalized(n) - s.normals[t]) < 1e-12);
    CHECK(dot(s.normals[t], s.centroids[t] - Vec3{0.5, -1.0, 2.0}) > 0);
  }
}

TEST_CASE("tetrahedral mesh invariants") {
  auto d = make_sphere({0, 0, 0}, 1.0, 2);
  const auto& m = d.volume;
  double vol = 0;
  for (int c = 0; c < m.num_cells(); ++c) {
    CHECK(m.volumes[c] > 0);
    vol += m.volumes[c];
  }
  CHECK(vol == Catch::Approx(d.surface.enclosed_volume).epsilon(1e-9));
}

TEST_CASE("ellipsoid") {
  // unit semi-axes reduce to the sphere
  auto de = make_ellipsoid({1, 1, 1}, 2);
  auto ds = make_sphere({0, 0, 0}, 1.0, 2);
  CHECK(de.surface.total_area == Catch::Approx(ds.surface.total_area).margin(1e-12));

  auto d = make_ellipsoid({1.0, 1.5, 0.75}, 3);
  CHECK(d.surface.enclosed_volume ==
        Catch::Approx(4.0 / 3.0 * kPi * 1.0 * 1.5 * 0.75).epsilon(0.01));
  CHECK(d.surface.enclosed_volume > 0);  // outward orientation
}

TEST_CASE("closest point queries") {
  auto d = make_sphere({0, 0, 0}, 1.0, 3);
  const auto& s = d.surface;

  auto r1 = closest_point(s, {2, 0, 0});
  CHECK(r1.distance == Catch::Approx(1.0).margin(2 * s.h * s.h));

  auto r2 = closest_point(s, s.vertices[17]);
  CHECK(r2.distance < 1e-12);

  auto r3 = closest_point(s, {0, 0, 0});
  CHECK(r3.distance == Catch::Approx(1.0).epsilon(0.01));

  // random points agree with brute force
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int n = 0; n < 25; ++n) {
    Vec3 x{u(rng), u(rng), u(rng)};
    auto fast = closest_point(s, x);
    double best = std::numeric_limits<double>::max();
    for (int t = 0; t < s.num_triangles(); ++t) {
      const auto& tri = s.triangles[t];
      Vec3 p = closest_point_on_triangle(x, s.vertices[tri[0]], s.vertices[tri[1]],
                                         s.vertices[tri[2]]);
      best = std::min(best, norm(p - x));
    }
    CHECK(fast.distance == Catch::Approx(best).margin(1e-12));
  }
}

TEST_CASE("OFF round trip and validation errors") {
  auto d = make_sphere({0, 0, 0}, 1.0, 1);
  TempFile f("psimt_test_sphere.off");
  save_off(d.surface, f.path);
  auto loaded = load_off(f.path);
  REQUIRE(loaded.vertices.size() == d.surface.vertices.size());
  REQUIRE(loaded.triangles.size() == d.surface.triangles.size());
  for (size_t t = 0; t < loaded.triangles.size(); ++t)
    CHECK(loaded.triangles[t] == d.surface.triangles[t]);

  // surface with a hole fails closedness
  {
    TriangulatedSurface holed = d.surface;
    holed.triangles.pop_back();
    TempFile g("psimt_test_holed.off");
    save_off(holed, g.path);
    CHECK_THROWS_AS(load_off(g.path), OrientationError);
  }

  // inward orientation (all triangles flipped) fails signed-volume check
  {
    TriangulatedSurface flipped = d.surface;
    for (auto& t : flipped.triangles) std::swap(t[1], t[2]);
    TempFile g("psimt_test_flipped.off");
    save_off(flipped, g.path);
    CHECK_THROWS_AS(load_off(g.path), OrientationError);
  }

  // malformed text reports a line number
  {
    TempFile g("psimt_test_bad.off");
    std::ofstream out(g.path);
    out << "OFF\n2 1 0\n0 0 0\nnot-a-number 1 2\n";
    out.close();
    try {
      load_off(g.path);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line_number == 4);
    }
  }
}

TEST_CASE("TET round trip") {
  auto d = make_sphere({0, 0, 0}, 1.0, 1);
  TempFile f("psimt_test_sphere.tet");
  save_tet(d.volume, f.path);
  auto loaded = load_tet(f.path);
  REQUIRE(loaded.cells.size() == d.volume.cells.size());
  for (size_t c = 0; c < loaded.cells.size(); ++c) CHECK(loaded.cells[c] == d.volume.cells[c]);
}

TEST_CASE("jittered surface stays valid") {
  auto d = make_sphere({0, 0, 0}, 1.0, 2);
  auto j = jitter_vertices(d.surface, 0.1, 2024);
  CHECK(j.enclosed_volume > 0);
  CHECK(j.total_area == Catch::Approx(d.surface.total_area).epsilon(0.1));
}

TEST_CASE("fibonacci sphere") {
  auto pts = fibonacci_sphere(64, {1, 2, 3}, 2.5);
  REQUIRE(pts.size() == 64);
  for (const auto& p : pts) CHECK(norm(p - Vec3{1, 2, 3}) == Catch::Approx(2.5).margin(1e-12));
}
