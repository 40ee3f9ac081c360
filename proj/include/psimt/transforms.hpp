#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "psimt/field.hpp"
#include "psimt/mesh.hpp"
#include "psimt/operators.hpp"
#include "psimt/parallel.hpp"
#include "psimt/quaternion.hpp"
#include "psimt/structural_set.hpp"

namespace psimt {

// Cauchy kernel K_psi(x) = (1/4pi) (x)_psi / |x|^3; |K_psi(x)| = 1/(4pi|x|^2).
inline RealQuaternion cauchy_kernel(const StructuralSet& psi, const Vec3& x) {
  const double r2 = norm2(x);
  if (r2 == 0.0) throw SingularPoint("cauchy_kernel: x = 0");
  const double r = std::sqrt(r2);
  return embed(psi, x) * (1.0 / (4.0 * std::numbers::pi * r2 * r));
}

// K_psi(. - a) as an evaluatable field with analytic first derivatives:
//   dK/dx_k = (1/4pi) [ psi^k / |y|^3 - 3 y_k (y)_psi / |y|^5 ],  y = x - a.
inline QuaternionField kernel_field(const StructuralSet& psi, const Vec3& a) {
  QuaternionField f;
  f.eval = [psi, a](const Vec3& x) { return ComplexQuaternion(cauchy_kernel(psi, x - a)); };
  f.grad = [psi, a](const Vec3& x) {
    const Vec3 y = x - a;
    const double r2 = norm2(y);
    if (r2 == 0.0) throw SingularPoint("kernel_field: gradient at the pole");
    const double r = std::sqrt(r2);
    const double inv4pi = 1.0 / (4.0 * std::numbers::pi);
    const RealQuaternion emb = embed(psi, y);
    std::array<ComplexQuaternion, 3> g;
    for (int k = 0; k < 3; ++k)
      g[k] = ComplexQuaternion(psi[k] * (inv4pi / (r2 * r)) -
                               emb * (3.0 * inv4pi * y[k] / (r2 * r2 * r)));
    return g;
  };
  return f;
}

// Complex-quaternion data sampled at the triangle centroids of a surface.
struct BoundaryField {
  std::vector<ComplexQuaternion> values;  // one per triangle

  static BoundaryField sample(const TriangulatedSurface& s, const QuaternionField& f) {
    BoundaryField b;
    b.values.resize(s.centroids.size());
    for (size_t i = 0; i < s.centroids.size(); ++i) b.values[i] = f.eval(s.centroids[i]);
    return b;
  }

  bool pure_vector(double tol = kPureVectorTol) const {
    for (const auto& v : values)
      if (!is_pure_vector(v, tol)) return false;
    return true;
  }

  double sup_norm() const {
    double m = 0;
    for (const auto& v : values) m = std::max(m, norm_c(v));
    return m;
  }
};

inline void require_pure_vector(const BoundaryField& f, const char* where) {
  if (!f.pure_vector()) throw NotPureVector(std::string(where) + ": boundary field has scalar part");
}

// psi-embedded outward normal nu_psi = sum_k psi^k nu_k.
inline RealQuaternion nu_psi(const StructuralSet& psi, const TriangulatedSurface& s, int tri) {
  return embed(psi, s.normals[tri]);
}

namespace detail {

inline ComplexQuaternion cauchy_sum(const TriangulatedSurface& s, const BoundaryField& f,
                                    const StructuralSet& psi, const Vec3& x) {
  ComplexQuaternion acc;
  for (int i = 0; i < s.num_triangles(); ++i) {
    const RealQuaternion kn = qmul(cauchy_kernel(psi, x - s.centroids[i]), nu_psi(psi, s, i));
    acc += qmul(ComplexQuaternion(kn), f.values[i]) * s.areas[i];
  }
  return acc;
}

inline ComplexQuaternion right_cauchy_sum(const TriangulatedSurface& s, const BoundaryField& f,
                                          const StructuralSet& psi, const Vec3& x) {
  ComplexQuaternion acc;
  for (int i = 0; i < s.num_triangles(); ++i) {
    const RealQuaternion nk = qmul(nu_psi(psi, s, i), cauchy_kernel(psi, x - s.centroids[i]));
    acc += qmul(f.values[i], ComplexQuaternion(nk)) * s.areas[i];
  }
  return acc;
}

// Centroid-rule cauchy_sum with near-field refinement: triangles whose
// centroid lies within near_factor * diameter of x are midpoint-subdivided
// (flat, boundary data constant per original triangle) down to `depth`
// levels, resolving the kernel where it varies fastest. Sub-triangles whose
// centroid falls within eps_factor * (their own diameter) of x are excluded
// -- the principal-value core for on-surface x; pass eps_factor = 0 for
// off-surface evaluation.
inline ComplexQuaternion cauchy_sum_refined(const TriangulatedSurface& s, const BoundaryField& f,
                                            const StructuralSet& psi, const Vec3& x, int depth,
                                            double near_factor, double eps_factor, bool right,
                                            const ComplexQuaternion& offset = {},
                                            int skip_node = -1) {
  ComplexQuaternion acc;
  struct Frame {
    Vec3 a, b, c;
    int lvl;
  };
  for (int i = 0; i < s.num_triangles(); ++i) {
    if (i == skip_node) continue;
    const ComplexQuaternion fv = f.values[i] - offset;
    const ComplexQuaternion nu{nu_psi(psi, s, i)};
    std::vector<Frame> stack{{s.vertices[s.triangles[i][0]], s.vertices[s.triangles[i][1]],
                              s.vertices[s.triangles[i][2]], 0}};
    while (!stack.empty()) {
      const Frame fr = stack.back();
      stack.pop_back();
      const Vec3 ctr = (fr.a + fr.b + fr.c) / 3.0;
      const double diam = std::max({norm(fr.b - fr.a), norm(fr.c - fr.b), norm(fr.a - fr.c)});
      const double dist = norm(ctr - x);
      if (fr.lvl < depth && dist <= near_factor * diam) {
        const Vec3 ab = (fr.a + fr.b) * 0.5, bc = (fr.b + fr.c) * 0.5, ca = (fr.c + fr.a) * 0.5;
        stack.push_back({fr.a, ab, ca, fr.lvl + 1});
        stack.push_back({ab, fr.b, bc, fr.lvl + 1});
        stack.push_back({ca, bc, fr.c, fr.lvl + 1});
        stack.push_back({ab, bc, ca, fr.lvl + 1});
        continue;
      }
      if (dist <= eps_factor * diam) continue;
      const double area = 0.5 * norm(cross(fr.b - fr.a, fr.c - fr.a));
      const ComplexQuaternion K{cauchy_kernel(psi, x - ctr)};
      acc += (right ? qmul(fv, qmul(nu, K)) : qmul(qmul(K, nu), fv)) * area;
    }
  }
  return acc;
}

}  // namespace detail

// Cauchy transform K_Gamma[f](x) = int K(x-xi) nu_psi(xi) f(xi) dS, centroid
// rule, oriented so that constants reproduce (K_Gamma[c] = c inside, 0
// outside; empirically int K(x-xi) nu_psi dS = +1 for x in Omega). Accuracy
// degrades within ~2h of the surface; use boundary_limit there.
inline ComplexQuaternion cauchy_transform(const TriangulatedSurface& s, const BoundaryField& f,
                                          const StructuralSet& psi, const Vec3& x,
                                          bool guard = true) {
  if (guard && closest_point(s, x).distance < 2.0 * s.h)
    throw TooCloseToSurface("cauchy_transform: dist(x, Gamma) < 2h");
  return detail::cauchy_sum(s, f, psi, x);
}

// [f] K_Gamma: kernel on the right; right-psi-hyperholomorphic in x.
inline ComplexQuaternion right_cauchy_transform(const TriangulatedSurface& s,
                                                const BoundaryField& f, const StructuralSet& psi,
                                                const Vec3& x, bool guard = true) {
  if (guard && closest_point(s, x).distance < 2.0 * s.h)
    throw TooCloseToSurface("right_cauchy_transform: dist(x, Gamma) < 2h");
  return detail::right_cauchy_sum(s, f, psi, x);
}

// The transform as a differentiable field (for hyperholomorphy checks).
inline QuaternionField cauchy_transform_field(const TriangulatedSurface& s, BoundaryField f,
                                              const StructuralSet& psi) {
  QuaternionField out;
  out.eval = [&s, f = std::move(f), psi](const Vec3& x) {
    return detail::cauchy_sum(s, f, psi, x);
  };
  return out;
}

inline QuaternionField right_cauchy_transform_field(const TriangulatedSurface& s, BoundaryField f,
                                                    const StructuralSet& psi) {
  QuaternionField out;
  out.eval = [&s, f = std::move(f), psi](const Vec3& x) {
    return detail::right_cauchy_sum(s, f, psi, x);
  };
  return out;
}

namespace detail {

inline bool point_in_tet(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c,
                         const Vec3& d) {
  auto sv = [](const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3) {
    return dot(p1 - p0, cross(p2 - p0, p3 - p0));
  };
  const double v = sv(a, b, c, d);
  const double s0 = sv(p, b, c, d), s1 = sv(a, p, c, d), s2 = sv(a, b, p, d), s3 = sv(a, b, c, p);
  const double tol = -1e-12 * std::abs(v);
  if (v > 0) return s0 >= tol && s1 >= tol && s2 >= tol && s3 >= tol;
  return s0 <= -tol && s1 <= -tol && s2 <= -tol && s3 <= -tol;
}

// 8-way tet subdivision: 4 corner tets plus 4 from the central octahedron.
inline std::array<std::array<Vec3, 4>, 8> subdivide_tet(const std::array<Vec3, 4>& t) {
  const Vec3 &v0 = t[0], &v1 = t[1], &v2 = t[2], &v3 = t[3];
  const Vec3 m01 = (v0 + v1) * 0.5, m02 = (v0 + v2) * 0.5, m03 = (v0 + v3) * 0.5;
  const Vec3 m12 = (v1 + v2) * 0.5, m13 = (v1 + v3) * 0.5, m23 = (v2 + v3) * 0.5;
  return {{{v0, m01, m02, m03},
           {v1, m01, m12, m13},
           {v2, m02, m12, m23},
           {v3, m03, m13, m23},
           {m01, m23, m02, m12},
           {m01, m23, m12, m13},
           {m01, m23, m13, m03},
           {m01, m23, m03, m02}}};
}

inline double tet_volume(const std::array<Vec3, 4>& t) {
  return std::abs(dot(t[1] - t[0], cross(t[2] - t[0], t[3] - t[0]))) / 6.0;
}

}  // namespace detail

namespace detail {

// Near-field cell contribution to the Teodorescu quadrature. Cells close to
// x (within 1.5x their bounding ball) are 8-way subdivided down to
// `max_depth` levels; at the deepest level the sub-cell containing x is
// dropped. |K| ~ |x|^-2 is absolutely integrable, so the dropped mass is
// O(sub-cell size); one refinement level keeps the evaluation-point bias
// below the far-field centroid-rule error so refinement studies converge
// monotonically.
inline ComplexQuaternion teodorescu_cell(const std::array<Vec3, 4>& tet,
                                         const QuaternionField& g, const StructuralSet& psi,
                                         const Vec3& x, int depth, int max_depth) {
  const Vec3 ctr = (tet[0] + tet[1] + tet[2] + tet[3]) * 0.25;
  double ball = 0;
  for (const auto& p : tet) ball = std::max(ball, norm(p - ctr));
  const double d = norm(x - ctr);
  if (d > 1.5 * ball || depth >= max_depth) {
    if (d <= 1.5 * ball && (point_in_tet(x, tet[0], tet[1], tet[2], tet[3]) || d < 1e-14))
      return {};
    return qmul(ComplexQuaternion(cauchy_kernel(psi, x - ctr)), g.eval(ctr)) * tet_volume(tet);
  }
  ComplexQuaternion acc;
  for (const auto& sub : subdivide_tet(tet)) acc += teodorescu_cell(sub, g, psi, x, depth + 1, max_depth);
  return acc;
}

}  // namespace detail

// Teodorescu transform T[g](x) = -int_Omega K(x-xi) g(xi) dm(xi), signed to
// pair with cauchy_transform (psiD[T[g]] = g inside, Borel-Pompeiu
// K_Gamma[f] + T[psiD f] = f chi_Omega). Cell-centroid rule with near-field
// subdivision around x (see detail::teodorescu_cell).
inline ComplexQuaternion teodorescu(const TetrahedralMesh& m, const QuaternionField& g,
                                    const StructuralSet& psi, const Vec3& x,
                                    int near_field_depth = 2) {
  ComplexQuaternion acc;
  for (int i = 0; i < m.num_cells(); ++i) {
    const auto& c = m.cells[i];
    const Vec3& ctr = m.centroids[i];
    double ball = 0;
    for (int k = 0; k < 4; ++k) ball = std::max(ball, norm(m.vertices[c[k]] - ctr));
    if (norm(x - ctr) > 1.5 * ball) {
      acc += qmul(ComplexQuaternion(cauchy_kernel(psi, x - ctr)), g.eval(ctr)) * m.volumes[i];
      continue;
    }
    const std::array<Vec3, 4> tet = {m.vertices[c[0]], m.vertices[c[1]], m.vertices[c[2]],
                                     m.vertices[c[3]]};
    acc += detail::teodorescu_cell(tet, g, psi, x, 0, near_field_depth);
  }
  return -acc;
}

// Principal-value singular Cauchy transform at node t (a triangle centroid):
//   S[f](t) = f(t) + 2 PV int K(t-xi) nu_psi (f(xi) - f(t)) dS.
// The subtracted integrand weakens the singularity; triangles near t are
// subdivided (2 levels within 4 diameters) so the excluded PV core shrinks
// to eps_factor * sub-triangle diameter, keeping the excluded mass O(h/4).
// The node triangle itself is skipped: its subtracted integrand vanishes at
// the node to first order.
inline ComplexQuaternion singular_cauchy(const TriangulatedSurface& s, const BoundaryField& f,
                                         const StructuralSet& psi, int node,
                                         double eps_factor = 1.0) {
  const ComplexQuaternion ft = f.values[node];
  const ComplexQuaternion acc =
      detail::cauchy_sum_refined(s, f, psi, s.centroids[node], /*depth=*/2, /*near_factor=*/4.0,
                                 eps_factor, /*right=*/false, ft, node);
  return ft + 2.0 * acc;
}

// Right-sided version [f] S_Gamma (kernel on the right of nu and f).
inline ComplexQuaternion right_singular_cauchy(const TriangulatedSurface& s,
                                               const BoundaryField& f, const StructuralSet& psi,
                                               int node, double eps_factor = 1.0) {
  const ComplexQuaternion ft = f.values[node];
  const ComplexQuaternion acc =
      detail::cauchy_sum_refined(s, f, psi, s.centroids[node], /*depth=*/2, /*near_factor=*/4.0,
                                 eps_factor, /*right=*/true, ft, node);
  return ft + 2.0 * acc;
}

enum class Side { Plus, Minus };  // Plus = interior limit, Minus = exterior

// One-sided boundary value of the Cauchy transform at node t: Richardson
// extrapolation of evaluations at t -/+ delta_k nu(t), delta_k = delta0/2^k,
// k = 0..3, delta0 = 4h, each evaluated with the near-field-refined rule so
// the smallest offset (h/2) is still resolved.
inline ComplexQuaternion boundary_limit(const TriangulatedSurface& s, const BoundaryField& f,
                                        const StructuralSet& psi, int node, Side side) {
  const Vec3 t = s.centroids[node];
  const Vec3 nu = s.normals[node];
  const double delta0 = 4.0 * s.h;
  const double sign = side == Side::Plus ? -1.0 : 1.0;
  std::array<ComplexQuaternion, 4> v;
  for (int k = 0; k < 4; ++k)
    v[k] = detail::cauchy_sum_refined(s, f, psi, t + nu * (sign * delta0 / double(1 << k)),
                                      /*depth=*/2, /*near_factor=*/4.0, /*eps_factor=*/0.0,
                                      /*right=*/false);

  const double d1 = norm_c(v[1] - v[0]);
  const double d2 = norm_c(v[2] - v[1]);
  const double d3 = norm_c(v[3] - v[2]);
  // Diverging only if increments grow twice in a row AND the growth is
  // significant against the data scale; tiny non-monotone increments are
  // normal quadrature noise, especially on the side where the limit is ~0.
  if (d3 > 1.5 * d2 && d2 > 1.5 * d1 && d1 > 0 && d3 > 0.05 * f.sup_norm())
    throw ExtrapolationDiverged("boundary_limit: estimates not contracting");

  // Neville tableau with step ratio 2, first-order base error.
  std::array<ComplexQuaternion, 4> r = v;
  for (int m = 1; m < 4; ++m) {
    const double w = double(1 << m);
    for (int k = 3; k >= m; --k) r[k] = (w * r[k] - r[k - 1]) * (1.0 / (w - 1.0));
  }
  return r[3];
}

// Sokhotski-Plemelj data at a set of nodes.
struct JumpReport {
  std::vector<int> nodes;
  std::vector<ComplexQuaternion> K_plus, K_minus, S_value;
  double max_jump_residual{0};   // max |(K+ - K-) - f|
  double max_sum_residual{0};    // max |(K+ + K-) - S|
};

inline JumpReport jump_check(const TriangulatedSurface& s, const BoundaryField& f,
                             const StructuralSet& psi, std::span<const int> nodes) {
  JumpReport r;
  r.nodes.assign(nodes.begin(), nodes.end());
  const int n = static_cast<int>(nodes.size());
  r.K_plus.resize(n);
  r.K_minus.resize(n);
  r.S_value.resize(n);
  std::vector<double> jr(n), sr(n);
  parallel_for(n, [&](int i) {
    const int node = nodes[i];
    r.K_plus[i] = boundary_limit(s, f, psi, node, Side::Plus);
    r.K_minus[i] = boundary_limit(s, f, psi, node, Side::Minus);
    r.S_value[i] = singular_cauchy(s, f, psi, node);
    jr[i] = norm_c(r.K_plus[i] - r.K_minus[i] - f.values[node]);
    sr[i] = norm_c(r.K_plus[i] + r.K_minus[i] - r.S_value[i]);
  });
  for (int i = 0; i < n; ++i) {
    r.max_jump_residual = std::max(r.max_jump_residual, jr[i]);
    r.max_sum_residual = std::max(r.max_sum_residual, sr[i]);
  }
  return r;
}

// Sc/Vec split of the vector-field Cauchy transform:
//   Sc = int <K, [nu_psi, f]> dS,
//   Vec = int K <nu_psi, f> dS - int [K, [nu_psi, f]] dS;
// their sum reassembles cauchy_transform algebraically.
inline std::pair<ComplexQuaternion, ComplexQuaternion> sc_vec_split(
    const TriangulatedSurface& s, const BoundaryField& f, const StructuralSet& psi,
    const Vec3& x) {
  require_pure_vector(f, "sc_vec_split");
  Complex scalar{};
  ComplexQuaternion vector;
  for (int i = 0; i < s.num_triangles(); ++i) {
    const ComplexQuaternion K{cauchy_kernel(psi, x - s.centroids[i])};
    const ComplexQuaternion nu{nu_psi(psi, s, i)};
    const ComplexQuaternion nf = cross(nu, f.values[i]);
    scalar -= dot(K, nf) * s.areas[i];
    vector -= (K * dot(nu, f.values[i]) - cross(K, nf)) * s.areas[i];
  }
  return {ComplexQuaternion(scalar), vector};
}

// Default probe set for M_psi membership: Fibonacci spheres of 64 points at
// radii 0.5 and 2.0 times the circumradius, centered on the surface.
inline std::vector<Vec3> default_probes(const TriangulatedSurface& s, int n_per_shell = 64) {
  std::vector<Vec3> pts = fibonacci_sphere(n_per_shell, s.center, 0.5 * s.circumradius);
  auto outer = fibonacci_sphere(n_per_shell, s.center, 2.0 * s.circumradius);
  pts.insert(pts.end(), outer.begin(), outer.end());
  return pts;
}

// max over probes (off Gamma) of |int <K(x-xi), [nu_psi, f]> dS|.
inline double m_psi_test(const TriangulatedSurface& s, const BoundaryField& f,
                         const StructuralSet& psi, std::span<const Vec3> probes) {
  require_pure_vector(f, "m_psi_test");
  std::vector<double> vals(probes.size());
  parallel_for(static_cast<int>(probes.size()), [&](int p) {
    Complex acc{};
    for (int i = 0; i < s.num_triangles(); ++i) {
      const ComplexQuaternion K{cauchy_kernel(psi, probes[p] - s.centroids[i])};
      acc += dot(K, cross(ComplexQuaternion(nu_psi(psi, s, i)), f.values[i])) * s.areas[i];
    }
    vals[p] = std::abs(acc);
  });
  return *std::max_element(vals.begin(), vals.end());
}

// On-Gamma variant at the given nodes, with eps-exclusion PV rule.
inline double m_psi_star_test(const TriangulatedSurface& s, const BoundaryField& f,
                              const StructuralSet& psi, std::span<const int> nodes,
                              double eps_factor = 2.0) {
  require_pure_vector(f, "m_psi_star_test");
  std::vector<double> vals(nodes.size());
  parallel_for(static_cast<int>(nodes.size()), [&](int p) {
    const int node = nodes[p];
    const Vec3 t = s.centroids[node];
    const double eps = eps_factor * s.tri_diameters[node];
    Complex acc{};
    for (int i = 0; i < s.num_triangles(); ++i) {
      const Vec3 d = t - s.centroids[i];
      if (i == node || norm(d) <= eps) continue;
      const ComplexQuaternion K{cauchy_kernel(psi, d)};
      acc += dot(K, cross(ComplexQuaternion(nu_psi(psi, s, i)), f.values[i])) * s.areas[i];
    }
    vals[p] = std::abs(acc);
  });
  return vals.empty() ? 0.0 : *std::max_element(vals.begin(), vals.end());
}

// Inside/outside classification via the nearest triangle's outward normal.
inline bool is_interior(const TriangulatedSurface& s, const Vec3& x) {
  const auto cp = closest_point(s, x);
  return dot(x - cp.point, s.normals[cp.triangle]) < 0;
}

// Borel-Pompeiu residual K[trace f](x) + T[psiD f](x) - (f(x) inside | 0
// outside); the residual is pure quadrature error for C^1 fields.
inline ComplexQuaternion borel_pompeiu_residual(const TriangulatedSurface& s,
                                                const TetrahedralMesh& m,
                                                const QuaternionField& f,
                                                const StructuralSet& psi, const Vec3& x,
                                                const DerivativeScheme& scheme) {
  // Looser guard than cauchy_transform's 2h: coarse meshes (level <= 1) have
  // no interior point 2h away from the surface, and the residual is itself an
  // error measure, so degraded near-surface accuracy only inflates it.
  if (closest_point(s, x).distance < s.h)
    throw TooCloseToSurface("borel_pompeiu_residual: probe too close to Gamma");
  const BoundaryField trace = BoundaryField::sample(s, f);
  QuaternionField df;
  df.eval = [&f, psi, scheme](const Vec3& xi) { return apply_psiD(psi, f, xi, scheme); };
  ComplexQuaternion r = cauchy_transform(s, trace, psi, x, false) + teodorescu(m, df, psi, x);
  if (is_interior(s, x)) r -= f.eval(x);
  return r;
}

// Diagnostic for the Holder-type condition: eps-truncated discretization of
//   (1/4pi) int |f(xi) - f(t)|_c / |xi - t|^2 dS
// at eps = 8h, 4h, 2h, h. `increment_ratio` near or above 1 across the
// shrinking sequence indicates divergence (e.g. a jump at t).
struct HolderEstimate {
  double value{0};             // estimate at the smallest eps
  double increment_ratio{0};   // last increment / previous increment
  bool diverging{false};
};

inline HolderEstimate holder_condition_estimate(const TriangulatedSurface& s,
                                                const BoundaryField& f, int node) {
  const Vec3 t = s.centroids[node];
  const ComplexQuaternion ft = f.values[node];
  auto truncated = [&](double eps) {
    double acc = 0;
    for (int i = 0; i < s.num_triangles(); ++i) {
      if (i == node) continue;
      const double r2 = norm2(t - s.centroids[i]);
      if (r2 <= eps * eps) continue;
      acc += norm_c(f.values[i] - ft) / r2 * s.areas[i];
    }
    return acc / (4.0 * std::numbers::pi);
  };
  const std::array<double, 4> eps = {8 * s.h, 4 * s.h, 2 * s.h, 1 * s.h};
  std::array<double, 4> I;
  for (int k = 0; k < 4; ++k) I[k] = truncated(eps[k]);
  HolderEstimate e;
  e.value = I[3];
  const double inc_prev = std::abs(I[2] - I[1]);
  const double inc_last = std::abs(I[3] - I[2]);
  e.increment_ratio = inc_prev > 0 ? inc_last / inc_prev : 0.0;
  e.diverging = inc_last > 1e-12 && e.increment_ratio > 0.75;
  return e;
}

}  // namespace psimt
