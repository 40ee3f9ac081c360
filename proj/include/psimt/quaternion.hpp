#pragma once

#include <cmath>
#include <complex>

#include "psimt/errors.hpp"
#include "psimt/vec3.hpp"

namespace psimt {

using Complex = std::complex<double>;

// |Sc(a)| below this counts as a pure vector; quadrature outputs are never
// exactly pure.
inline constexpr double kPureVectorTol = 1e-14;

// Relative threshold on |a*conj(a)| below which a complex quaternion is
// treated as a zero divisor.
inline constexpr double kZeroDivisorTol = 1e-12;

struct RealQuaternion {
  double a0{0}, a1{0}, a2{0}, a3{0};

  constexpr RealQuaternion() = default;
  constexpr RealQuaternion(double s, double x, double y, double z) : a0(s), a1(x), a2(y), a3(z) {}

  static constexpr RealQuaternion one() { return {1, 0, 0, 0}; }
  static constexpr RealQuaternion i() { return {0, 1, 0, 0}; }
  static constexpr RealQuaternion j() { return {0, 0, 1, 0}; }
  static constexpr RealQuaternion k() { return {0, 0, 0, 1}; }

  constexpr RealQuaternion operator+(const RealQuaternion& b) const {
    return {a0 + b.a0, a1 + b.a1, a2 + b.a2, a3 + b.a3};
  }
  constexpr RealQuaternion operator-(const RealQuaternion& b) const {
    return {a0 - b.a0, a1 - b.a1, a2 - b.a2, a3 - b.a3};
  }
  constexpr RealQuaternion operator-() const { return {-a0, -a1, -a2, -a3}; }
  constexpr RealQuaternion operator*(double s) const { return {a0 * s, a1 * s, a2 * s, a3 * s}; }
};

constexpr RealQuaternion operator*(double s, const RealQuaternion& q) { return q * s; }

constexpr RealQuaternion qmul(const RealQuaternion& a, const RealQuaternion& b) {
  return {a.a0 * b.a0 - a.a1 * b.a1 - a.a2 * b.a2 - a.a3 * b.a3,
          a.a0 * b.a1 + a.a1 * b.a0 + a.a2 * b.a3 - a.a3 * b.a2,
          a.a0 * b.a2 - a.a1 * b.a3 + a.a2 * b.a0 + a.a3 * b.a1,
          a.a0 * b.a3 + a.a1 * b.a2 - a.a2 * b.a1 + a.a3 * b.a0};
}

constexpr RealQuaternion operator*(const RealQuaternion& a, const RealQuaternion& b) {
  return qmul(a, b);
}

constexpr RealQuaternion conj(const RealQuaternion& a) { return {a.a0, -a.a1, -a.a2, -a.a3}; }

inline double norm_r(const RealQuaternion& a) {
  return std::sqrt(a.a0 * a.a0 + a.a1 * a.a1 + a.a2 * a.a2 + a.a3 * a.a3);
}

struct ComplexQuaternion {
  Complex a0{0}, a1{0}, a2{0}, a3{0};

  ComplexQuaternion() = default;
  ComplexQuaternion(Complex s, Complex x, Complex y, Complex z) : a0(s), a1(x), a2(y), a3(z) {}
  ComplexQuaternion(const RealQuaternion& r) : a0(r.a0), a1(r.a1), a2(r.a2), a3(r.a3) {}
  explicit ComplexQuaternion(double s) : a0(s) {}
  explicit ComplexQuaternion(Complex s) : a0(s) {}

  static ComplexQuaternion one() { return RealQuaternion::one(); }
  static ComplexQuaternion i() { return RealQuaternion::i(); }
  static ComplexQuaternion j() { return RealQuaternion::j(); }
  static ComplexQuaternion k() { return RealQuaternion::k(); }

  // Pure vector from coordinates in the standard basis i, j, k.
  static ComplexQuaternion vector(Complex v1, Complex v2, Complex v3) { return {0.0, v1, v2, v3}; }
  static ComplexQuaternion vector(const Vec3& v) { return {0.0, v.x, v.y, v.z}; }

  ComplexQuaternion operator+(const ComplexQuaternion& b) const {
    return {a0 + b.a0, a1 + b.a1, a2 + b.a2, a3 + b.a3};
  }
  ComplexQuaternion operator-(const ComplexQuaternion& b) const {
    return {a0 - b.a0, a1 - b.a1, a2 - b.a2, a3 - b.a3};
  }
  ComplexQuaternion operator-() const { return {-a0, -a1, -a2, -a3}; }
  ComplexQuaternion operator*(Complex s) const { return {a0 * s, a1 * s, a2 * s, a3 * s}; }
  ComplexQuaternion operator*(double s) const { return {a0 * s, a1 * s, a2 * s, a3 * s}; }
  ComplexQuaternion& operator+=(const ComplexQuaternion& b) {
    a0 += b.a0; a1 += b.a1; a2 += b.a2; a3 += b.a3;
    return *this;
  }
  ComplexQuaternion& operator-=(const ComplexQuaternion& b) {
    a0 -= b.a0; a1 -= b.a1; a2 -= b.a2; a3 -= b.a3;
    return *this;
  }

  ComplexQuaternion sc() const { return {a0, 0.0, 0.0, 0.0}; }
  ComplexQuaternion vec() const { return {0.0, a1, a2, a3}; }
};

inline ComplexQuaternion operator*(Complex s, const ComplexQuaternion& q) { return q * s; }
inline ComplexQuaternion operator*(double s, const ComplexQuaternion& q) { return q * s; }

inline ComplexQuaternion qmul(const ComplexQuaternion& a, const ComplexQuaternion& b) {
  return {a.a0 * b.a0 - a.a1 * b.a1 - a.a2 * b.a2 - a.a3 * b.a3,
          a.a0 * b.a1 + a.a1 * b.a0 + a.a2 * b.a3 - a.a3 * b.a2,
          a.a0 * b.a2 - a.a1 * b.a3 + a.a2 * b.a0 + a.a3 * b.a1,
          a.a0 * b.a3 + a.a1 * b.a2 - a.a2 * b.a1 + a.a3 * b.a0};
}

inline ComplexQuaternion operator*(const ComplexQuaternion& a, const ComplexQuaternion& b) {
  return qmul(a, b);
}

inline ComplexQuaternion conj(const ComplexQuaternion& a) { return {a.a0, -a.a1, -a.a2, -a.a3}; }

inline double norm_c(const ComplexQuaternion& a) {
  return std::sqrt(std::norm(a.a0) + std::norm(a.a1) + std::norm(a.a2) + std::norm(a.a3));
}

inline bool is_pure_vector(const ComplexQuaternion& a, double tol = kPureVectorTol) {
  return std::abs(a.a0) <= tol;
}

// Bilinear product <a,b> = sum a_k b_k (no conjugation); inputs must be pure
// vectors.
inline Complex dot(const ComplexQuaternion& a, const ComplexQuaternion& b) {
  if (!is_pure_vector(a) || !is_pure_vector(b))
    throw NotPureVector("dot: nonzero scalar part");
  return a.a1 * b.a1 + a.a2 * b.a2 + a.a3 * b.a3;
}

inline ComplexQuaternion cross(const ComplexQuaternion& a, const ComplexQuaternion& b) {
  if (!is_pure_vector(a) || !is_pure_vector(b))
    throw NotPureVector("cross: nonzero scalar part");
  return {0.0, a.a2 * b.a3 - a.a3 * b.a2, a.a3 * b.a1 - a.a1 * b.a3, a.a1 * b.a2 - a.a2 * b.a1};
}

// a * conj(a) is the complex scalar a0^2 + a1^2 + a2^2 + a3^2.
inline Complex self_product(const ComplexQuaternion& a) {
  return a.a0 * a.a0 + a.a1 * a.a1 + a.a2 * a.a2 + a.a3 * a.a3;
}

inline ComplexQuaternion inverse(const ComplexQuaternion& a,
                                 double zero_divisor_tol = kZeroDivisorTol) {
  const Complex d = self_product(a);
  const double scale = norm_c(a);
  if (std::abs(d) <= zero_divisor_tol * scale * scale || scale == 0.0)
    throw ZeroDivisor("inverse: a*conj(a) below zero-divisor threshold");
  return conj(a) * (1.0 / d);
}

}  // namespace psimt
