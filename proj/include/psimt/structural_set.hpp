#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "psimt/quaternion.hpp"
#include "psimt/vec3.hpp"

namespace psimt {

// Ordered triple of real quaternions psi = {psi^1, psi^2, psi^3} subject to
// psi^j conj(psi^k) + psi^k conj(psi^j) = 2 delta_jk. Carries theta when the
// set is a psi^theta instance.
struct StructuralSet {
  RealQuaternion psi1, psi2, psi3;
  std::optional<double> theta;

  const RealQuaternion& operator[](int k) const { return k == 0 ? psi1 : (k == 1 ? psi2 : psi3); }
};

// The quaternion exponential cos(theta) + i*sin(theta). Note: the factor
// e^{i theta} in psi^theta uses the quaternionic unit i, not the complex
// imaginary unit; structural sets consist of real quaternions.
inline RealQuaternion exp_itheta(double theta) {
  return {std::cos(theta), std::sin(theta), 0, 0};
}

inline double reduce_angle(double theta) {
  const double two_pi = 2.0 * std::numbers::pi;
  double t = std::fmod(theta, two_pi);
  if (t < 0) t += two_pi;
  return t;
}

// psi^theta = { i, i e^{i theta} j, e^{i theta} j }.
inline StructuralSet make_psi_theta(double theta) {
  const double t = reduce_angle(theta);
  const RealQuaternion e = exp_itheta(t);
  StructuralSet s;
  s.psi1 = RealQuaternion::i();
  s.psi2 = qmul(qmul(RealQuaternion::i(), e), RealQuaternion::j());
  s.psi3 = qmul(e, RealQuaternion::j());
  s.theta = t;
  return s;
}

// Max over j,k of |psi^j conj(psi^k) + psi^k conj(psi^j) - 2 delta_jk|.
inline double verify_structural(const StructuralSet& s) {
  double worst = 0;
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < 3; ++k) {
      RealQuaternion r = qmul(s[j], conj(s[k])) + qmul(s[k], conj(s[j]));
      if (j == k) r.a0 -= 2.0;
      worst = std::max(worst, norm_r(r));
    }
  }
  return worst;
}

// (x)_psi = sum_k x_k psi^k; satisfies |(x)_psi| = |x|.
inline RealQuaternion embed(const StructuralSet& s, const Vec3& x) {
  return s.psi1 * x.x + s.psi2 * x.y + s.psi3 * x.z;
}

inline StructuralSet conj_set(const StructuralSet& s) {
  StructuralSet c;
  c.psi1 = conj(s.psi1);
  c.psi2 = conj(s.psi2);
  c.psi3 = conj(s.psi3);
  return c;
}

}  // namespace psimt
