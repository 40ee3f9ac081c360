#pragma once

#include <array>
#include <functional>
#include <optional>
#include <utility>

#include "psimt/errors.hpp"
#include "psimt/quaternion.hpp"
#include "psimt/vec3.hpp"

namespace psimt {

// Axis-aligned box used as a domain hint for finite-difference stencils.
struct BoundingBox {
  Vec3 lo, hi;

  bool contains(const Vec3& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z;
  }
};

// Evaluatable map R^3 -> H(C), optionally carrying analytic first
// derivatives (partial f / partial x_k, k = 1..3).
struct QuaternionField {
  std::function<ComplexQuaternion(const Vec3&)> eval;
  std::function<std::array<ComplexQuaternion, 3>(const Vec3&)> grad;  // may be empty
  std::optional<BoundingBox> domain_hint;

  bool has_analytic_grad() const { return static_cast<bool>(grad); }

  static QuaternionField constant(const ComplexQuaternion& c) {
    QuaternionField f;
    f.eval = [c](const Vec3&) { return c; };
    f.grad = [](const Vec3&) {
      return std::array<ComplexQuaternion, 3>{ComplexQuaternion{}, ComplexQuaternion{},
                                              ComplexQuaternion{}};
    };
    return f;
  }
};

struct DerivativeScheme {
  enum class Mode { Analytic, CentralDifference };
  Mode mode{Mode::CentralDifference};
  double h{1e-4};

  static DerivativeScheme analytic() { return {Mode::Analytic, 0.0}; }
  static DerivativeScheme central(double step) { return {Mode::CentralDifference, step}; }
};

inline std::array<ComplexQuaternion, 3> gradient(const QuaternionField& f, const Vec3& x,
                                                 const DerivativeScheme& scheme) {
  if (scheme.mode == DerivativeScheme::Mode::Analytic) {
    if (!f.has_analytic_grad())
      throw StencilOutsideDomain("gradient: analytic mode requested but field has no grad");
    return f.grad(x);
  }
  const double h = scheme.h;
  const Vec3 e[3] = {{h, 0, 0}, {0, h, 0}, {0, 0, h}};
  if (f.domain_hint) {
    for (const auto& d : e) {
      if (!f.domain_hint->contains(x + d) || !f.domain_hint->contains(x - d))
        throw StencilOutsideDomain("gradient: stencil leaves field domain");
    }
  }
  std::array<ComplexQuaternion, 3> g;
  for (int k = 0; k < 3; ++k)
    g[k] = (f.eval(x + e[k]) - f.eval(x - e[k])) * (1.0 / (2.0 * h));
  return g;
}

// Matrix of second partials d^2 f / dx_j dx_k. When the field carries an
// analytic gradient the gradient is differenced once (exact on cubics up to
// round-off); otherwise nested first-derivative stencils with step sqrt(h).
inline std::array<std::array<ComplexQuaternion, 3>, 3> second_partials(
    const QuaternionField& f, const Vec3& x, const DerivativeScheme& scheme) {
  std::array<std::array<ComplexQuaternion, 3>, 3> H;
  const double h = scheme.mode == DerivativeScheme::Mode::Analytic ? 1e-5 : scheme.h;
  if (f.has_analytic_grad()) {
    const Vec3 e[3] = {{h, 0, 0}, {0, h, 0}, {0, 0, h}};
    for (int j = 0; j < 3; ++j) {
      auto gp = f.grad(x + e[j]);
      auto gm = f.grad(x - e[j]);
      for (int k = 0; k < 3; ++k) H[j][k] = (gp[k] - gm[k]) * (1.0 / (2.0 * h));
    }
    return H;
  }
  const double h2 = std::sqrt(h);
  const Vec3 e[3] = {{h2, 0, 0}, {0, h2, 0}, {0, 0, h2}};
  DerivativeScheme inner = DerivativeScheme::central(h2);
  for (int j = 0; j < 3; ++j) {
    auto gp = gradient(f, x + e[j], inner);
    auto gm = gradient(f, x - e[j], inner);
    for (int k = 0; k < 3; ++k) H[j][k] = (gp[k] - gm[k]) * (1.0 / (2.0 * h2));
  }
  return H;
}

}  // namespace psimt
