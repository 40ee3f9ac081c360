#include <catch2/catch_amalgamated.hpp>

#include <numbers>
#include <random>

#include "psimt/operators.hpp"
#include "psimt/transforms.hpp"

using namespace psimt;

namespace {

const double kPi = std::numbers::pi;

// Vector field (f1,f2,f3)(x) given by linear maps; analytic gradient attached.
QuaternionField linear_vector_field(const std::array<std::array<double, 4>, 3>& c) {
  // f_m(x) = c[m][0] + c[m][1] x1 + c[m][2] x2 + c[m][3] x3
  QuaternionField f;
  f.eval = [c](const Vec3& x) {
    ComplexQuaternion q;
    const double xs[3] = {x.x, x.y, x.z};
    Complex v[3];
    for (int m = 0; m < 3; ++m) {
      double s = c[m][0];
      for (int k = 0; k < 3; ++k) s += c[m][k + 1] * xs[k];
      v[m] = s;
    }
    q.a1 = v[0];
    q.a2 = v[1];
    q.a3 = v[2];
    return q;
  };
  f.grad = [c](const Vec3&) {
    std::array<ComplexQuaternion, 3> g;
    for (int k = 0; k < 3; ++k) {
      g[k].a1 = c[0][k + 1];
      g[k].a2 = c[1][k + 1];
      g[k].a3 = c[2][k + 1];
    }
    return g;
  };
  return f;
}

// Random polynomial field of degree <= 2 in each component (all four parts),
// with exact analytic gradient.
QuaternionField random_poly_field(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  // coefficients for each of 4 components: 1, x, y, z, x^2, y^2, z^2, xy, xz, yz
  std::array<std::array<double, 10>, 4> c;
  for (auto& row : c)
    for (auto& v : row) v = u(rng);
  QuaternionField f;
  f.eval = [c](const Vec3& p) {
    const double b[10] = {1,           p.x,         p.y,     p.z,     p.x * p.x,
                          p.y * p.y,   p.z * p.z,   p.x * p.y, p.x * p.z, p.y * p.z};
    Complex v[4];
    for (int m = 0; m < 4; ++m) {
      double s = 0;
      for (int t = 0; t < 10; ++t) s += c[m][t] * b[t];
      v[m] = s;
    }
    return ComplexQuaternion{v[0], v[1], v[2], v[3]};
  };
  f.grad = [c](const Vec3& p) {
    // derivative of the basis wrt x, y, z
    const double dx[10] = {0, 1, 0, 0, 2 * p.x, 0, 0, p.y, p.z, 0};
    const double dy[10] = {0, 0, 1, 0, 0, 2 * p.y, 0, p.x, 0, p.z};
    const double dz[10] = {0, 0, 0, 1, 0, 0, 2 * p.z, 0, p.x, p.y};
    const double* d[3] = {dx, dy, dz};
    std::array<ComplexQuaternion, 3> g;
    for (int k = 0; k < 3; ++k) {
      Complex v[4];
      for (int m = 0; m < 4; ++m) {
        double s = 0;
        for (int t = 0; t < 10; ++t) s += c[m][t] * d[k][t];
        v[m] = s;
      }
      g[k] = ComplexQuaternion{v[0], v[1], v[2], v[3]};
    }
    return g;
  };
  return f;
}

}  // namespace

TEST_CASE("psiD and Dpsi basics") {
  auto psi = make_psi_theta(0.7);
  auto scheme = DerivativeScheme::analytic();
  auto cf = QuaternionField::constant(ComplexQuaternion{1.0, 2.0, Complex(0, 3), 4.0});
  CHECK(norm_c(apply_psiD(psi, cf, {0.3, -0.2, 0.9}, scheme)) == 0.0);
  CHECK(norm_c(apply_Dpsi(psi, cf, {0.3, -0.2, 0.9}, scheme)) == 0.0);

  // f(x) = x1 scalar -> psiD = psi^1 = i for every theta
  QuaternionField fx1;
  fx1.eval = [](const Vec3& x) { return ComplexQuaternion{x.x, 0, 0, 0}; };
  fx1.grad = [](const Vec3&) {
    return std::array<ComplexQuaternion, 3>{ComplexQuaternion{1.0, 0, 0, 0}, ComplexQuaternion{},
                                            ComplexQuaternion{}};
  };
  for (double th : {0.0, kPi / 2, 1.3}) {
    auto r = apply_psiD(make_psi_theta(th), fx1, {0.1, 0.2, 0.3}, scheme);
    CHECK(norm_c(r - ComplexQuaternion::i()) < 1e-14);
  }
}

TEST_CASE("kernel is annihilated by both operators") {
  const Vec3 a{0.0, 0.0, 0.0};
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  auto scheme = DerivativeScheme::central(1e-4);
  for (double th : {0.0, kPi / 2, kPi, 3 * kPi / 2, 1.0}) {
    auto psi = make_psi_theta(th);
    auto K = kernel_field(psi, a);
    double worst_l = 0, worst_r = 0;
    int done = 0;
    while (done < 20) {
      Vec3 x{u(rng), u(rng), u(rng)};
      if (norm(x - a) < 0.5) continue;
      ++done;
      worst_l = std::max(worst_l, norm_c(apply_psiD(psi, K, x, scheme)));
      worst_r = std::max(worst_r, norm_c(apply_Dpsi(psi, K, x, scheme)));
    }
    CHECK(worst_l <= 1e-6);
    CHECK(worst_r <= 1e-6);
  }
}

TEST_CASE("partial operators") {
  auto scheme = DerivativeScheme::analytic();
  const Vec3 x{0.4, -0.3, 0.2};

  // f = (x1, 0, 0): psi_div -> 1, conj_psi_div -> 1
  auto f = linear_vector_field({{{0, 1, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}});
  for (double th : {0.0, kPi / 2, 2.1}) {
    CHECK(norm_c(psi_div(th, f, x, scheme) - ComplexQuaternion::one()) < 1e-14);
    CHECK(norm_c(conj_psi_div(th, f, x, scheme) - ComplexQuaternion::one()) < 1e-14);
  }

  // f0 = x2, theta=0: psi_grad -> k (= psi^2 at theta 0)
  QuaternionField f0;
  f0.eval = [](const Vec3& p) { return ComplexQuaternion{p.y, 0, 0, 0}; };
  f0.grad = [](const Vec3&) {
    return std::array<ComplexQuaternion, 3>{ComplexQuaternion{}, ComplexQuaternion{1.0, 0, 0, 0},
                                            ComplexQuaternion{}};
  };
  CHECK(norm_c(psi_grad(0.0, f0, x, scheme) - ComplexQuaternion::k()) < 1e-14);
}

TEST_CASE("operator decomposition identities") {
  auto scheme = DerivativeScheme::analytic();
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> ut(0.0, 2 * kPi);
  for (int n = 0; n < 30; ++n) {
    auto f = random_poly_field(rng);
    const double th = ut(rng);
    auto psi = make_psi_theta(th);
    Vec3 x{u(rng), u(rng), u(rng)};
    // psiD[f] = -psi_div(vec f) + psi_grad(f0) + psi_rot(vec f)
    auto lhs = apply_psiD(psi, f, x, scheme);
    auto rhs = psi_grad(th, f, x, scheme) + psi_rot(th, f, x, scheme) - psi_div(th, f, x, scheme);
    CHECK(norm_c(lhs - rhs) <= 1e-10);
    // Dpsi[f] = -conj_psi_div(vec f) + psi_grad(f0) + conj_psi_rot(vec f)
    auto lhs2 = apply_Dpsi(psi, f, x, scheme);
    auto rhs2 = psi_grad(th, f, x, scheme) + conj_psi_rot(th, f, x, scheme) -
                conj_psi_div(th, f, x, scheme);
    CHECK(norm_c(lhs2 - rhs2) <= 1e-10);
  }
}

TEST_CASE("system residuals") {
  auto scheme = DerivativeScheme::analytic();
  const Vec3 x{0.2, 0.5, -0.1};

  auto zero_f = linear_vector_field({{{0.4, 0, 0, 0}, {-1.1, 0, 0, 0}, {2.0, 0, 0, 0}}});
  for (const Complex& e : mt_residual(1.234, zero_f, x, scheme)) CHECK(std::abs(e) < 1e-14);

  // theta=0, f=(x2, 0, x1) solves the system
  auto sol = linear_vector_field({{{0, 0, 1, 0}, {0, 0, 0, 0}, {0, 1, 0, 0}}});
  for (const Complex& e : mt_residual(0.0, sol, x, scheme)) CHECK(std::abs(e) < 1e-14);

  // theta=0, f=(x1,0,0): first equation -1, others 0
  auto fx = linear_vector_field({{{0, 1, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}});
  auto r = mt_residual(0.0, fx, x, scheme);
  CHECK(std::abs(r[0] - Complex(-1.0)) < 1e-14);
  CHECK(std::abs(r[1]) < 1e-14);
  CHECK(std::abs(r[2]) < 1e-14);
  CHECK(std::abs(r[3]) < 1e-14);
}

TEST_CASE("residual equivalence with psiD and Dpsi") {
  auto scheme = DerivativeScheme::analytic();
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> ut(0.0, 2 * kPi);
  for (int n = 0; n < 25; ++n) {
    std::array<std::array<double, 4>, 3> c;
    for (auto& row : c)
      for (auto& v : row) v = u(rng);
    auto f = linear_vector_field(c);
    const double th = ut(rng);
    auto psi = make_psi_theta(th);
    Vec3 x{u(rng), u(rng), u(rng)};
    double mt = 0;
    for (const Complex& e : mt_residual(th, f, x, scheme)) mt = std::max(mt, std::abs(e));
    const double dl = norm_c(apply_psiD(psi, f, x, scheme));
    const double dr = norm_c(apply_Dpsi(psi, f, x, scheme));
    // small together or large together
    const bool mt_zero = mt <= 1e-8, dl_zero = dl <= 1e-8, dr_zero = dr <= 1e-8;
    CHECK(mt_zero == dl_zero);
    CHECK(dl_zero == dr_zero);
    // quantitative: residual vector and psiD have equal norms up to algebra
    CHECK(mt <= 2 * dl + 1e-12);
    CHECK(dl <= 2 * mt + 1e-12);
  }
}

TEST_CASE("laplacian factorization") {
  auto scheme = DerivativeScheme::analytic();
  const Vec3 x{0.3, 0.1, -0.4};

  // harmonic polynomial x1^2 - x2^2
  QuaternionField h;
  h.eval = [](const Vec3& p) { return ComplexQuaternion{p.x * p.x - p.y * p.y, 0, 0, 0}; };
  h.grad = [](const Vec3& p) {
    return std::array<ComplexQuaternion, 3>{ComplexQuaternion{2 * p.x, 0, 0, 0},
                                            ComplexQuaternion{-2 * p.y, 0, 0, 0},
                                            ComplexQuaternion{}};
  };
  for (double th : {0.0, kPi / 2, kPi, 3 * kPi / 2, 1.0})
    CHECK(norm_c(laplacian_check(make_psi_theta(th), h, x, scheme)) < 1e-8);

  // |x|^2: Laplacian 6, factorization must agree
  QuaternionField r2;
  r2.eval = [](const Vec3& p) {
    return ComplexQuaternion{p.x * p.x + p.y * p.y + p.z * p.z, 0, 0, 0};
  };
  r2.grad = [](const Vec3& p) {
    return std::array<ComplexQuaternion, 3>{ComplexQuaternion{2 * p.x, 0, 0, 0},
                                            ComplexQuaternion{2 * p.y, 0, 0, 0},
                                            ComplexQuaternion{2 * p.z, 0, 0, 0}};
  };
  CHECK(norm_c(laplacian_check(make_psi_theta(0.9), r2, x, scheme)) < 1e-8);

  // non-structural triple on f = x1 x2 is far from zero
  QuaternionField xy;
  xy.eval = [](const Vec3& p) { return ComplexQuaternion{p.x * p.y, 0, 0, 0}; };
  xy.grad = [](const Vec3& p) {
    return std::array<ComplexQuaternion, 3>{ComplexQuaternion{p.y, 0, 0, 0},
                                            ComplexQuaternion{p.x, 0, 0, 0}, ComplexQuaternion{}};
  };
  StructuralSet bad{RealQuaternion::i(), RealQuaternion::i(), RealQuaternion::j(), {}};
  CHECK(norm_c(laplacian_check(bad, xy, x, scheme)) >= 0.1);
}

TEST_CASE("finite differences converge at second order") {
  std::mt19937_64 rng(43);
  QuaternionField f;
  f.eval = [](const Vec3& p) {
    return ComplexQuaternion{std::sin(p.x) * p.y, std::cos(p.y * p.z), p.x * p.x * p.z, 0.0};
  };
  auto psi = make_psi_theta(1.1);
  const Vec3 x{0.3, 0.5, 0.7};
  // reference with tiny step
  auto ref = apply_psiD(psi, f, x, DerivativeScheme::central(1e-6));
  double e1 = norm_c(apply_psiD(psi, f, x, DerivativeScheme::central(2e-3)) - ref);
  double e2 = norm_c(apply_psiD(psi, f, x, DerivativeScheme::central(1e-3)) - ref);
  CHECK(e1 / e2 >= 3.5);
  CHECK(e1 / e2 <= 4.5);
}

TEST_CASE("special case mappings") {
  auto scheme = DerivativeScheme::analytic();
  // theta=0 solution (x2, 0, x1) maps to x2 i + x1 j with classical div and rot zero
  auto sol = linear_vector_field({{{0, 0, 1, 0}, {0, 0, 0, 0}, {0, 1, 0, 0}}});
  auto m = special_case_map(SpecialCase::DivRot, sol);
  CHECK(m.theta == 0.0);
  const Vec3 x{0.7, -0.2, 0.3};
  auto v = m.mapped.eval(x);
  CHECK(std::abs(v.a1 - Complex(x.y)) < 1e-14);
  CHECK(std::abs(v.a2 - Complex(x.x)) < 1e-14);
  CHECK(std::abs(v.a3) < 1e-14);
  // classical div and rot via the gradient of the mapped field
  auto g = gradient(m.mapped, x, scheme);
  const Complex div = g[0].a1 + g[1].a2 + g[2].a3;
  CHECK(std::abs(div) < 1e-12);
  const Complex rot1 = g[1].a3 - g[2].a2, rot2 = g[2].a1 - g[0].a3, rot3 = g[0].a2 - g[1].a1;
  CHECK(std::abs(rot1) + std::abs(rot2) + std::abs(rot3) < 1e-12);

  // zero field maps to zero field
  auto z = special_case_map(SpecialCase::Riesz, QuaternionField::constant({}));
  CHECK(norm_c(z.mapped.eval(x)) == 0.0);
  CHECK(z.theta == Catch::Approx(kPi));

  // Cimmino is the identity map at theta = pi/2
  auto cm = special_case_map(SpecialCase::Cimmino, sol);
  CHECK(cm.theta == Catch::Approx(kPi / 2));
  CHECK(norm_c(cm.mapped.eval(x) - sol.eval(x)) == 0.0);
}

TEST_CASE("two sided check") {
  auto scheme = DerivativeScheme::central(1e-4);
  const double th = 0.8;
  auto psi = make_psi_theta(th);
  std::vector<Vec3> samples = {{0.9, 0.1, 0.0}, {-0.7, 0.5, 0.6}, {0.2, -0.8, 0.4}};

  // fundamental solution is two-sided hyperholomorphic away from its pole
  auto K = kernel_field(psi, Vec3{5.0, 5.0, 5.0});
  auto r1 = two_sided_check(th, K, samples, scheme, 1e-6);
  CHECK(r1.two_sided);

  // scalar field x1 fails: psi-grad = i
  QuaternionField fx1;
  fx1.eval = [](const Vec3& x) { return ComplexQuaternion{x.x, 0, 0, 0}; };
  auto r2 = two_sided_check(th, fx1, samples, scheme, 1e-6);
  CHECK_FALSE(r2.two_sided);
  CHECK(r2.max_grad_scalar == Catch::Approx(1.0).epsilon(1e-6));

  // constant quaternion is trivially two-sided
  auto r3 = two_sided_check(th, QuaternionField::constant({1.0, 2.0, 3.0, 4.0}), samples, scheme,
                            1e-10);
  CHECK(r3.two_sided);
}
