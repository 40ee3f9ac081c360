#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "psimt/field.hpp"
#include "psimt/quaternion.hpp"
#include "psimt/structural_set.hpp"

namespace psimt {

// Left operator psiD[f] = sum_k psi^k (df/dx_k).
inline ComplexQuaternion apply_psiD(const StructuralSet& psi, const QuaternionField& f,
                                    const Vec3& x, const DerivativeScheme& scheme) {
  auto g = gradient(f, x, scheme);
  ComplexQuaternion out;
  for (int k = 0; k < 3; ++k) out += qmul(ComplexQuaternion(psi[k]), g[k]);
  return out;
}

// Right operator Dpsi[f] = sum_k (df/dx_k) psi^k.
inline ComplexQuaternion apply_Dpsi(const StructuralSet& psi, const QuaternionField& f,
                                    const Vec3& x, const DerivativeScheme& scheme) {
  auto g = gradient(f, x, scheme);
  ComplexQuaternion out;
  for (int k = 0; k < 3; ++k) out += qmul(g[k], ComplexQuaternion(psi[k]));
  return out;
}

// psi^theta-div[f_vec] = df1/dx1 + (df2/dx2 - df3/dx3) * (i e^{i theta}).
inline ComplexQuaternion psi_div(double theta, const QuaternionField& f, const Vec3& x,
                                 const DerivativeScheme& scheme) {
  auto g = gradient(f, x, scheme);
  const ComplexQuaternion ie = qmul(RealQuaternion::i(), exp_itheta(theta));
  return ComplexQuaternion(g[0].a1) + (g[1].a2 - g[2].a3) * ie;
}

// psi^theta-grad[f0] = sum_k (df0/dx_k) psi^k (f0 = scalar part of f).
inline ComplexQuaternion psi_grad(double theta, const QuaternionField& f, const Vec3& x,
                                  const DerivativeScheme& scheme) {
  auto g = gradient(f, x, scheme);
  const StructuralSet s = make_psi_theta(theta);
  ComplexQuaternion out;
  for (int k = 0; k < 3; ++k) out += g[k].a0 * ComplexQuaternion(s[k]);
  return out;
}

// psi^theta-rot[f_vec] per the displayed formula, with e = e^{i theta}:
//   (-df3/dx2 - df2/dx3) e + (-df1/dx3 (i e) - df3/dx1) j
//   + (df2/dx1 - df1/dx2 (i e)) k.
inline ComplexQuaternion psi_rot(double theta, const QuaternionField& f, const Vec3& x,
                                 const DerivativeScheme& scheme) {
  auto g = gradient(f, x, scheme);
  const RealQuaternion e = exp_itheta(theta);
  const RealQuaternion ie = qmul(RealQuaternion::i(), e);
  const ComplexQuaternion term1 = (-g[1].a3 - g[2].a2) * ComplexQuaternion(e);
  const ComplexQuaternion term2 =
      qmul(ComplexQuaternion(ie) * (-g[2].a1) - ComplexQuaternion(g[0].a3),
           ComplexQuaternion::j());
  const ComplexQuaternion term3 =
      qmul(ComplexQuaternion(g[0].a2) - ComplexQuaternion(ie) * g[1].a1, ComplexQuaternion::k());
  return term1 + term2 + term3;
}

// Conjugated-coefficient divergence entering Dpsi[f].
inline ComplexQuaternion conj_psi_div(double theta, const QuaternionField& f, const Vec3& x,
                                      const DerivativeScheme& scheme) {
  auto g = gradient(f, x, scheme);
  const RealQuaternion ie_bar = conj(qmul(RealQuaternion::i(), exp_itheta(theta)));
  return ComplexQuaternion(g[0].a1) + (g[1].a2 - g[2].a3) * ComplexQuaternion(ie_bar);
}

// Conjugated-coefficient rotor entering Dpsi[f]:
//   (-df3/dx2 - df2/dx3) conj(e) - df1/dx3 conj(i e j) + df3/dx1 j
//   - df2/dx1 k - df1/dx2 conj(i e k).
inline ComplexQuaternion conj_psi_rot(double theta, const QuaternionField& f, const Vec3& x,
                                      const DerivativeScheme& scheme) {
  auto g = gradient(f, x, scheme);
  const RealQuaternion e = exp_itheta(theta);
  const RealQuaternion ie = qmul(RealQuaternion::i(), e);
  const RealQuaternion iej_bar = conj(qmul(ie, RealQuaternion::j()));
  const RealQuaternion iek_bar = conj(qmul(ie, RealQuaternion::k()));
  ComplexQuaternion out = (-g[1].a3 - g[2].a2) * ComplexQuaternion(conj(e));
  out -= g[2].a1 * ComplexQuaternion(iej_bar);
  out += g[0].a3 * ComplexQuaternion::j();
  out -= g[0].a2 * ComplexQuaternion::k();
  out -= g[1].a1 * ComplexQuaternion(iek_bar);
  return out;
}

// The four left-hand sides of the generalized Moisil-Teodorescu system for a
// vector field f = f1 i + f2 j + f3 k; all four vanish iff psiD[f] = 0.
inline std::array<Complex, 4> mt_residual(double theta, const QuaternionField& f, const Vec3& x,
                                          const DerivativeScheme& scheme) {
  auto g = gradient(f, x, scheme);
  const double c = std::cos(theta), s = std::sin(theta);
  // g[k].a_m = d f_m / d x_{k+1}
  const Complex d1f1 = g[0].a1, d2f1 = g[1].a1, d3f1 = g[2].a1;
  const Complex d1f2 = g[0].a2, d2f2 = g[1].a2, d3f2 = g[2].a2;
  const Complex d1f3 = g[0].a3, d2f3 = g[1].a3, d3f3 = g[2].a3;
  return {-d1f1 + (d2f2 - d3f3) * s - (d2f3 + d3f2) * c,
          (d3f3 - d2f2) * c - (d2f3 + d3f2) * s,
          -d1f3 + d3f1 * s + d2f1 * c,
          d1f2 - d3f1 * c + d2f1 * s};
}

// psiD[conj(psi)D[f]](x) - Laplacian(f)(x); vanishes exactly when psi is a
// structural set.
inline ComplexQuaternion laplacian_check(const StructuralSet& psi, const QuaternionField& f,
                                         const Vec3& x, const DerivativeScheme& scheme) {
  auto H = second_partials(f, x, scheme);
  const StructuralSet psibar = conj_set(psi);
  ComplexQuaternion lhs;
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k)
      lhs += qmul(ComplexQuaternion(psi[j]), qmul(ComplexQuaternion(psibar[k]), H[j][k]));
  ComplexQuaternion lap = H[0][0] + H[1][1] + H[2][2];
  return lhs - lap;
}

enum class SpecialCase { DivRot, Cimmino, Riesz, Theta3PiHalf };

struct SpecialCaseMapping {
  double theta;
  QuaternionField mapped;
  std::string description;
};

// Component remappings relating solutions of the generalized system at the
// four named theta values to the classical systems.
inline SpecialCaseMapping special_case_map(SpecialCase c, const QuaternionField& f) {
  SpecialCaseMapping m;
  auto permute = [](const ComplexQuaternion& q, int p1, int p2, int p3) {
    const Complex comp[4] = {q.a0, q.a1, q.a2, q.a3};
    ComplexQuaternion out;
    out.a1 = comp[p1];
    out.a2 = comp[p2];
    out.a3 = comp[p3];
    return out;
  };
  switch (c) {
    case SpecialCase::DivRot: {
      // (f1, f2, f3) solving the system at theta = 0 -> f1 i + f3 j + f2 k,
      // a classical div = 0, rot = 0 field.
      m.theta = 0.0;
      m.description = "div-rot: f1 i + f3 j + f2 k";
      QuaternionField g;
      auto src_eval = f.eval;
      g.eval = [src_eval, permute](const Vec3& x) { return permute(src_eval(x), 1, 3, 2); };
      if (f.has_analytic_grad()) {
        auto src_grad = f.grad;
        g.grad = [src_grad, permute](const Vec3& x) {
          auto gr = src_grad(x);
          return std::array<ComplexQuaternion, 3>{permute(gr[0], 1, 3, 2), permute(gr[1], 1, 3, 2),
                                                  permute(gr[2], 1, 3, 2)};
        };
      }
      g.domain_hint = f.domain_hint;
      m.mapped = std::move(g);
      break;
    }
    case SpecialCase::Riesz: {
      // -> f1 + f3 i + f2 j solving the Riesz system at theta = pi.
      m.theta = std::numbers::pi;
      m.description = "Riesz: f1 + f3 i + f2 j";
      QuaternionField g;
      auto src_eval = f.eval;
      g.eval = [src_eval](const Vec3& x) {
        auto q = src_eval(x);
        return ComplexQuaternion{q.a1, q.a3, q.a2, 0.0};
      };
      if (f.has_analytic_grad()) {
        auto src_grad = f.grad;
        g.grad = [src_grad](const Vec3& x) {
          auto gr = src_grad(x);
          std::array<ComplexQuaternion, 3> out;
          for (int k = 0; k < 3; ++k) out[k] = ComplexQuaternion{gr[k].a1, gr[k].a3, gr[k].a2, 0.0};
          return out;
        };
      }
      g.domain_hint = f.domain_hint;
      m.mapped = std::move(g);
      break;
    }
    case SpecialCase::Cimmino:
      m.theta = std::numbers::pi / 2;
      m.description = "Cimmino: identity component map";
      m.mapped = f;
      break;
    case SpecialCase::Theta3PiHalf:
      m.theta = 3 * std::numbers::pi / 2;
      m.description = "theta = 3pi/2 (Dirac bispinor-related): identity component map";
      m.mapped = f;
      break;
  }
  return m;
}

struct TwoSidedReport {
  double max_grad_scalar{0};   // max |psi-grad of Sc(f)| over samples
  double max_mt_residual{0};   // max MT-system residual of Vec(f) over samples
  bool two_sided{false};
  double tolerance{0};
};

// Lemma-style check: f is left-right-psi^theta-hyperholomorphic iff the
// psi-grad of its scalar part vanishes and its vector part solves the system.
inline TwoSidedReport two_sided_check(double theta, const QuaternionField& f,
                                      std::span<const Vec3> samples,
                                      const DerivativeScheme& scheme, double tol = 1e-8) {
  TwoSidedReport r;
  r.tolerance = tol;
  for (const Vec3& x : samples) {
    r.max_grad_scalar = std::max(r.max_grad_scalar, norm_c(psi_grad(theta, f, x, scheme)));
    auto res = mt_residual(theta, f, x, scheme);
    for (const Complex& e : res) r.max_mt_residual = std::max(r.max_mt_residual, std::abs(e));
  }
  r.two_sided = r.max_grad_scalar <= tol && r.max_mt_residual <= tol;
  return r;
}

}  // namespace psimt
