#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "psimt/field.hpp"
#include "psimt/mesh.hpp"
#include "psimt/operators.hpp"
#include "psimt/parallel.hpp"
#include "psimt/transforms.hpp"

namespace psimt {

struct ExtensionParams {
  double rho = 0;       // blend/mollification radius; 0 -> 2.5 * surface h
  int k_nearest = 6;    // nodes entering the blend
  double fd_step = 0;   // step for psiD of the extension; 0 -> rho / 4

  double resolved_rho(const TriangulatedSurface& s) const { return rho > 0 ? rho : 2.5 * s.h; }
  double resolved_fd_step(const TriangulatedSurface& s) const {
    const double r = resolved_rho(s);
    return fd_step > 0 ? std::min(fd_step, r / 4.0) : r / 4.0;
  }
};

// Whitney-type surrogate: f^w(x) = X_{Omega u Gamma}(x) * blend(x), where
// blend(x) interpolates the boundary data at the nearest surface nodes to
// the closest point of x, with singular Franke-Little weights (exact at
// nodes, vanishing smoothly at the blend radius).
class BoundaryExtension {
 public:
  BoundaryExtension(const TriangulatedSurface& surf, BoundaryField f, ExtensionParams params)
      : surf_(&surf), f_(std::move(f)), params_(params), rho_(params.resolved_rho(surf)) {
    if (surf_->num_triangles() == 0) throw DegenerateMesh("extension: empty surface");
  }

  const ExtensionParams& params() const { return params_; }
  double rho() const { return rho_; }

  // Interpolant of the boundary data at the surface projection of x; defined
  // on all of R^3 (no characteristic cutoff). One-sided derivatives of f^w
  // inside Omega coincide with derivatives of this.
  ComplexQuaternion blend(const Vec3& x) const {
    const auto cp = closest_point(*surf_, x);
    if (cp.triangle < 0) throw DegenerateMesh("extension: closest-point query failed");
    const Vec3 p = cp.point;
    auto ids = surf_->centroid_grid.nearest(p, params_.k_nearest);
    double dk = 0;
    for (int i : ids) dk = std::max(dk, norm(surf_->centroids[i] - p));
    const double R = std::max(rho_, 1.05 * dk);
    auto in_rho = surf_->centroid_grid.within(p, rho_);
    if (in_rho.size() > ids.size()) ids = std::move(in_rho);

    ComplexQuaternion num;
    double den = 0;
    for (int i : ids) {
      const double d = norm(surf_->centroids[i] - p);
      if (d < 1e-12 * surf_->h) return f_.values[i];  // exact at nodes
      if (d >= R) continue;
      const double w = (R - d) / (R * d);
      num += f_.values[i] * (w * w);
      den += w * w;
    }
    if (den == 0) return f_.values[ids.front()];
    return num * (1.0 / den);
  }

  bool inside(const Vec3& x) const { return is_interior(*surf_, x); }

  ComplexQuaternion fw(const Vec3& x) const {
    if (!inside(x) && closest_point(*surf_, x).distance > 0) return {};
    return blend(x);
  }

  QuaternionField fw_field() const {
    QuaternionField out;
    out.eval = [this](const Vec3& x) { return fw(x); };
    return out;
  }

  // psi^theta D of the extension, by central differences of the (uncut)
  // blend; the step stays at or below rho/4 so the blend dominates
  // truncation.
  ComplexQuaternion psiD_blend(const StructuralSet& psi, const Vec3& x) const {
    const double h = params_.resolved_fd_step(*surf_);
    const Vec3 e[3] = {{h, 0, 0}, {0, h, 0}, {0, 0, h}};
    ComplexQuaternion out;
    for (int k = 0; k < 3; ++k) {
      const ComplexQuaternion d = (blend(x + e[k]) - blend(x - e[k])) * (1.0 / (2.0 * h));
      out += qmul(ComplexQuaternion(psi[k]), d);
    }
    return out;
  }

 private:
  const TriangulatedSurface* surf_;
  BoundaryField f_;
  ExtensionParams params_;
  double rho_;
};

inline QuaternionField extend_boundary_field(const TriangulatedSurface& surf,
                                             const BoundaryField& f,
                                             const ExtensionParams& params) {
  auto ext = std::make_shared<BoundaryExtension>(surf, f, params);
  QuaternionField out;
  out.eval = [ext](const Vec3& x) { return ext->fw(x); };
  return out;
}

namespace detail {

// Quadrature cell with retained geometry, so near-field evaluations can
// subdivide on demand.
struct QuadCell {
  std::array<Vec3, 4> verts;
  Vec3 centroid;
  double volume;
  double ball;  // radius of the bounding ball around the centroid
  ComplexQuaternion g;

  static QuadCell from_verts(const std::array<Vec3, 4>& v) {
    QuadCell c;
    c.verts = v;
    c.centroid = (v[0] + v[1] + v[2] + v[3]) * 0.25;
    c.volume = tet_volume(v);
    c.ball = 0;
    for (const auto& p : v) c.ball = std::max(c.ball, norm(p - c.centroid));
    return c;
  }
};

}  // namespace detail

struct DecompositionOptions {
  double membership_tol = 0;   // 0 -> 0.05 * sup|f| + 1e-12
  int trace_sample_nodes = 64;
  unsigned seed = 20240901;
  bool refine_boundary_layer = true;
  int near_field_depth = 2;    // on-demand subdivision depth near x
};

// F+ and F- evaluators plus the diagnostics gathered while building them.
struct Decomposition {
  QuaternionField F_plus;   // valid on Omega_+
  QuaternionField F_minus;  // valid on Omega_-
  std::vector<int> trace_nodes;
  std::vector<double> trace_residuals;     // |F+(t)+F-(t)-f(t)| at sampled nodes
  double max_trace_residual{0};
  double membership_scalar{0};             // m_psi_test value of the input
  HolderEstimate holder;
  bool holder_warning{false};
  double theta{0};
  double rho{0};
  double fd_step{0};

  // Shared quadrature state backing the evaluator closures.
  std::shared_ptr<void> state;
};

namespace detail {

struct DecompositionState {
  const TriangulatedSurface* surf;
  std::shared_ptr<BoundaryExtension> ext;
  StructuralSet psi;
  std::vector<QuadCell> cells;
  int near_field_depth{2};

  ComplexQuaternion g_at(const Vec3& p) const { return ext->psiD_blend(psi, p); }

  // Near-field refinement keeps the parent cell's precomputed density (the
  // density is smooth at cell scale, only the kernel needs resolving), so
  // evaluations stay free of closest-point queries.
  ComplexQuaternion near_contribution(const std::array<Vec3, 4>& tet, const ComplexQuaternion& g,
                                      const Vec3& x, int depth) const {
    const QuadCell c = QuadCell::from_verts(tet);
    const double d = norm(x - c.centroid);
    if (d > 1.5 * c.ball || depth >= near_field_depth) {
      if (point_in_tet(x, tet[0], tet[1], tet[2], tet[3]) || d < 1e-14)
        return {};  // dropped mass is O(cell size), kernel absolutely integrable
      return qmul(ComplexQuaternion(cauchy_kernel(psi, x - c.centroid)), g) * c.volume;
    }
    ComplexQuaternion acc;
    for (const auto& sub : subdivide_tet(tet)) acc += near_contribution(sub, g, x, depth + 1);
    return acc;
  }

  // T[psiD f^w](x) over the retained cells (same sign convention as
  // teodorescu(): T[g] = -int K g dm).
  ComplexQuaternion teodorescu_of_extension(const Vec3& x) const {
    ComplexQuaternion acc;
    for (const auto& c : cells) {
      if (norm(x - c.centroid) > 1.5 * c.ball) {
        acc += qmul(ComplexQuaternion(cauchy_kernel(psi, x - c.centroid)), c.g) * c.volume;
      } else {
        acc += near_contribution(c.verts, c.g, x, 0);
      }
    }
    return -acc;
  }
};

}  // namespace detail

// One-sided limit of a field along the normal at node t, Richardson scheme
// matching boundary_limit.
inline ComplexQuaternion field_boundary_limit(const QuaternionField& F,
                                              const TriangulatedSurface& s, int node, Side side) {
  const Vec3 t = s.centroids[node];
  const Vec3 nu = s.normals[node];
  const double delta0 = 4.0 * s.h;
  const double sign = side == Side::Plus ? -1.0 : 1.0;
  std::array<ComplexQuaternion, 4> v;
  for (int k = 0; k < 4; ++k) v[k] = F.eval(t + nu * (sign * delta0 / double(1 << k)));
  std::array<ComplexQuaternion, 4> r = v;
  for (int m = 1; m < 4; ++m) {
    const double w = double(1 << m);
    for (int k = 3; k >= m; --k) r[k] = (w * r[k] - r[k - 1]) * (1.0 / (w - 1.0));
  }
  return r[3];
}

// Constructive decomposition (the K*-transform route):
//   F+(x) = -T[psiD f^w](x) + f^w(x) on Omega_+,
//   F-(x) =  T[psiD f^w](x)          on Omega_-.
inline Decomposition decompose(const TriangulatedSurface& surf, const TetrahedralMesh& tets,
                               const BoundaryField& f, double theta,
                               const ExtensionParams& params,
                               const DecompositionOptions& opts = {}) {
  require_pure_vector(f, "decompose");
  const StructuralSet psi = make_psi_theta(theta);
  const double sup_f = f.sup_norm();

  Decomposition d;
  d.theta = theta;
  auto probes = default_probes(surf);
  d.membership_scalar = m_psi_test(surf, f, psi, probes);
  const double mtol = opts.membership_tol > 0 ? opts.membership_tol : 0.05 * sup_f + 1e-12;
  if (d.membership_scalar > mtol)
    throw MembershipFailed("decompose: scalar Cauchy integral " +
                           std::to_string(d.membership_scalar) + " exceeds tolerance " +
                           std::to_string(mtol));
  d.holder = holder_condition_estimate(surf, f, 0);
  d.holder_warning = d.holder.diverging;

  auto state = std::make_shared<detail::DecompositionState>();
  state->surf = &surf;
  state->ext = std::make_shared<BoundaryExtension>(surf, f, params);
  state->psi = psi;
  state->near_field_depth = opts.near_field_depth;
  d.rho = params.resolved_rho(surf);
  d.fd_step = params.resolved_fd_step(surf);

  // Retained quadrature cells; the boundary-adjacent layer is subdivided one
  // extra time since the integrand grows toward Gamma.
  std::vector<detail::QuadCell> proto;
  proto.reserve(tets.num_cells());
  for (int i = 0; i < tets.num_cells(); ++i) {
    const auto& c = tets.cells[i];
    const std::array<Vec3, 4> v = {tets.vertices[c[0]], tets.vertices[c[1]], tets.vertices[c[2]],
                                   tets.vertices[c[3]]};
    auto cell = detail::QuadCell::from_verts(v);
    const bool near_gamma =
        opts.refine_boundary_layer && closest_point(surf, cell.centroid).distance < 2.0 * cell.ball;
    if (near_gamma) {
      for (const auto& sub : detail::subdivide_tet(v))
        proto.push_back(detail::QuadCell::from_verts(sub));
    } else {
      proto.push_back(cell);
    }
  }
  state->cells = std::move(proto);
  parallel_for(static_cast<int>(state->cells.size()), [&](int i) {
    state->cells[i].g = state->g_at(state->cells[i].centroid);
  });

  auto raw = state.get();
  QuaternionField Fp, Fm;
  Fp.eval = [raw](const Vec3& x) {
    return -raw->teodorescu_of_extension(x) + raw->ext->blend(x);
  };
  Fm.eval = [raw](const Vec3& x) { return raw->teodorescu_of_extension(x); };
  d.F_plus = Fp;
  d.F_minus = Fm;
  d.state = state;

  // Trace check F+(t) + F-(t) vs f(t) at a seeded node sample, via one-sided
  // limits.
  std::mt19937_64 rng(opts.seed);
  std::vector<int> nodes;
  const int n_nodes = std::min<int>(opts.trace_sample_nodes, surf.num_triangles());
  std::uniform_int_distribution<int> pick(0, surf.num_triangles() - 1);
  while (static_cast<int>(nodes.size()) < n_nodes) nodes.push_back(pick(rng));
  d.trace_nodes = nodes;
  d.trace_residuals.resize(nodes.size());
  parallel_for(static_cast<int>(nodes.size()), [&](int i) {
    const ComplexQuaternion fp = field_boundary_limit(d.F_plus, surf, nodes[i], Side::Plus);
    const ComplexQuaternion fm = field_boundary_limit(d.F_minus, surf, nodes[i], Side::Minus);
    d.trace_residuals[i] = norm_c(fp + fm - f.values[nodes[i]]);
  });
  d.max_trace_residual = *std::max_element(d.trace_residuals.begin(), d.trace_residuals.end());
  return d;
}

struct DecompositionReport {
  double max_trace_residual{0};
  double max_mt_residual_plus{0};
  double max_mt_residual_minus{0};
  std::vector<std::pair<double, double>> decay;  // (|x|, |F-(x)|) samples
};

// Re-derives the defining properties of a decomposition: trace sum, MT
// residuals of F+/F- at interior/exterior probes, and far-field decay of F-.
inline DecompositionReport verify_decomposition(const Decomposition& d,
                                                const TriangulatedSurface& surf,
                                                const BoundaryField& f,
                                                std::span<const Vec3> interior_probes,
                                                std::span<const Vec3> exterior_probes,
                                                const DerivativeScheme& scheme) {
  DecompositionReport r;
  const int n = static_cast<int>(d.trace_nodes.size());
  std::vector<double> tr(n);
  parallel_for(n, [&](int i) {
    const ComplexQuaternion fp = field_boundary_limit(d.F_plus, surf, d.trace_nodes[i], Side::Plus);
    const ComplexQuaternion fm =
        field_boundary_limit(d.F_minus, surf, d.trace_nodes[i], Side::Minus);
    tr[i] = norm_c(fp + fm - f.values[d.trace_nodes[i]]);
  });
  for (double v : tr) r.max_trace_residual = std::max(r.max_trace_residual, v);

  std::vector<double> mp(interior_probes.size()), mm(exterior_probes.size());
  parallel_for(static_cast<int>(interior_probes.size()), [&](int i) {
    auto res = mt_residual(d.theta, d.F_plus, interior_probes[i], scheme);
    double worst = 0;
    for (const Complex& e : res) worst = std::max(worst, std::abs(e));
    mp[i] = worst;
  });
  parallel_for(static_cast<int>(exterior_probes.size()), [&](int i) {
    auto res = mt_residual(d.theta, d.F_minus, exterior_probes[i], scheme);
    double worst = 0;
    for (const Complex& e : res) worst = std::max(worst, std::abs(e));
    mm[i] = worst;
  });
  for (double v : mp) r.max_mt_residual_plus = std::max(r.max_mt_residual_plus, v);
  for (double v : mm) r.max_mt_residual_minus = std::max(r.max_mt_residual_minus, v);

  // Far-field decay samples of F- along a fixed set of directions.
  const double R0 = 3.0 * surf.circumradius;
  for (int k = 1; k <= 4; ++k) {
    const Vec3 x = surf.center + Vec3{1.0, 0.3, -0.2} * (R0 * k / std::sqrt(1.13));
    r.decay.push_back({norm(x - surf.center), norm_c(d.F_minus.eval(x))});
  }
  return r;
}

}  // namespace psimt
