#include "cloudagv/stability.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "test_util.hpp"

namespace cloudagv {
namespace {

using std::numbers::pi;
using testing::uniform;
using cplx = std::complex<double>;

std::array<cplx, 3> eigen_oracle(const Matrix3& a) {
  Eigen::Matrix3d m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = a[i][j];
  const Eigen::Vector3cd ev = Eigen::EigenSolver<Eigen::Matrix3d>(m, false).eigenvalues();
  return {ev(0), ev(1), ev(2)};
}

// Smallest worst-case distance over all pairings of the two root sets.
double matched_distance(std::array<cplx, 3> a, std::array<cplx, 3> b) {
  std::array<int, 3> perm{0, 1, 2};
  double best = INFINITY;
  do {
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) worst = std::max(worst, std::abs(a[i] - b[perm[i]]));
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Matrix3 random_matrix(double scale) {
  Matrix3 m{};
  for (auto& row : m)
    for (double& v : row) v = uniform(-scale, scale);
  return m;
}

// Outer-product form of the step matrix:
// I + Ts ( -Kx [v_n;0][v_s;0]^T + nu [w_n;0] e3^T - Ky nu e3 [w_s;0]^T - Ktheta nu e3 e3^T ),
// v = (cos, sin), w = (-sin, cos).
Matrix3 step_matrix_oracle(double th_n, double th_s, double nu, const Gains& g, double ts) {
  const double vn[3] = {std::cos(th_n), std::sin(th_n), 0};
  const double vs[3] = {std::cos(th_s), std::sin(th_s), 0};
  const double wn[3] = {-std::sin(th_n), std::cos(th_n), 0};
  const double ws[3] = {-std::sin(th_s), std::cos(th_s), 0};
  const double e3[3] = {0, 0, 1};
  Matrix3 a{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double m = -g.kx * vn[i] * vs[j] + nu * wn[i] * e3[j] - g.ky * nu * e3[i] * ws[j] -
                       g.ktheta * nu * e3[i] * e3[j];
      a[i][j] = (i == j ? 1.0 : 0.0) + ts * m;
    }
  return a;
}

TEST(ControlMatrixA, Examples) {
  const Gains g{25, 64, 16};
  const Matrix3 a0 = control_matrix_A(0.0, 0.0, 0.0, g, 0.005);
  EXPECT_EQ(a0, diag3(1.0 - 0.005 * 25, 1.0, 1.0));
  EXPECT_EQ(control_matrix_A(0.7, -1.1, 2.0, g, 0.0), identity3());

  // theta = pi/2, nu = 1, Ts = 5 ms.
  const Matrix3 a = control_matrix_A(pi / 2, pi / 2, 1.0, g, 0.005);
  const Matrix3 expected{{{1.0, 0.0, -0.005}, {0.0, 0.875, 0.0}, {0.32, 0.0, 0.92}}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(a[i][j], expected[i][j], 1e-15) << i << "," << j;
}

TEST(ControlMatrixA, MatchesOuterProductForm) {
  for (int n = 0; n < 1000; ++n) {
    const Gains g{uniform(0.1, 300), uniform(0.1, 100), uniform(0.1, 30)};
    const double th_n = uniform(-pi, pi);
    const double th_s = uniform(-pi, pi);
    const double nu = uniform(-3, 3);
    const double ts = uniform(1e-4, 0.05);
    const Matrix3 a = control_matrix_A(th_n, th_s, nu, g, ts);
    const Matrix3 b = step_matrix_oracle(th_n, th_s, nu, g, ts);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) ASSERT_NEAR(a[i][j], b[i][j], 1e-12);
  }
}

TEST(ControlMatrixA, NoOutageSpectrum) {
  // Without an outage the spectrum is 1 - Ts Kx and a double 1 - 8 nu Ts.
  const Gains g{25, 64, 16};
  for (int n = 0; n < 200; ++n) {
    const double th = uniform(-pi, pi);
    const double nu = uniform(0.1, 2.0);
    const auto ev = eigen_oracle(control_matrix_A(th, th, nu, g, 0.005));
    const std::array<cplx, 3> expected{1.0 - 0.125, 1.0 - 0.04 * nu, 1.0 - 0.04 * nu};
    // the double root is defective, so Eigen itself only resolves it to ~sqrt(eps)
    ASSERT_LT(matched_distance(ev, expected), 1e-6);
  }
}

TEST(Eigenvalues3x3, Examples) {
  const auto id = eigenvalues_3x3(identity3());
  for (const cplx& v : id.values) EXPECT_NEAR(std::abs(v - 1.0), 0.0, 1e-12);

  const auto d = eigenvalues_3x3(diag3(0.3, -0.9, 0.5));
  EXPECT_NEAR(d.values[0].real(), -0.9, 1e-14);
  EXPECT_NEAR(d.values[1].real(), 0.5, 1e-14);
  EXPECT_NEAR(d.values[2].real(), 0.3, 1e-14);
  for (const cplx& v : d.values) EXPECT_EQ(v.imag(), 0.0);

  const double phi = 0.7;
  const Matrix3 rot{{{std::cos(phi), -std::sin(phi), 0}, {std::sin(phi), std::cos(phi), 0}, {0, 0, 1}}};
  const auto r = eigenvalues_3x3(rot);
  const std::array<cplx, 3> expected{std::polar(1.0, phi), std::polar(1.0, -phi), 1.0};
  EXPECT_LT(matched_distance(r.values, expected), 1e-12);
}

TEST(Eigenvalues3x3, JordanBlockIsFlagged) {
  const Matrix3 j{{{0.5, 1, 0}, {0, 0.5, 1}, {0, 0, 0.5}}};
  const auto e = eigenvalues_3x3(j);
  EXPECT_TRUE(e.ill_conditioned);
  for (const cplx& v : e.values) EXPECT_NEAR(std::abs(v - 0.5), 0.0, 1e-4);
}

TEST(Eigenvalues3x3, AgreesWithEigenOnRandomMatrices) {
  for (int n = 0; n < 2000; ++n) {
    const Matrix3 a = random_matrix(n % 2 ? 1.0 : 50.0);
    const auto mine = eigenvalues_3x3(a);
    const auto ref = eigen_oracle(a);
    const double scale = std::max(1.0, max_abs_entry(a));
    ASSERT_LT(matched_distance(mine.values, ref), 1e-7 * scale) << "sample " << n;
  }
}

TEST(Eigenvalues3x3, InvariantsHold) {
  for (int n = 0; n < 2000; ++n) {
    const Matrix3 a = random_matrix(3.0);
    const auto e = eigenvalues_3x3(a).values;
    const cplx sum = e[0] + e[1] + e[2];
    const cplx prod = e[0] * e[1] * e[2];
    ASSERT_NEAR(sum.real(), trace(a), 1e-9);
    ASSERT_NEAR(sum.imag(), 0.0, 1e-9);
    ASSERT_NEAR(prod.real(), determinant(a), 1e-8 * std::max(1.0, std::abs(determinant(a))));
    ASSERT_NEAR(prod.imag(), 0.0, 1e-8);
    for (int i = 0; i < 3; ++i) {
      ASSERT_LT(std::abs(characteristic_polynomial(a)(e[i])), 1e-8 * 27.0);
      if (i > 0) ASSERT_GE(std::abs(e[i - 1]) + 1e-12, std::abs(e[i]));
      if (e[i].imag() != 0.0) {
        const bool has_conj = std::any_of(e.begin(), e.end(), [&](cplx z) { return z == std::conj(e[i]); });
        ASSERT_TRUE(has_conj);
      }
    }
  }
}

TEST(CheckStabilityStep, Classification) {
  EXPECT_EQ(check_stability_step(diag3(0.9, 0.8, 0.7)).classification, StabilityClass::stable);
  EXPECT_EQ(check_stability_step(identity3()).classification, StabilityClass::marginal);
  EXPECT_EQ(check_stability_step(diag3(1.05, 0.5, 0.5)).classification, StabilityClass::unstable);
  EXPECT_EQ(check_stability_step(diag3(0.0, 0.5, 0.5)).classification, StabilityClass::unstable);
  // unstable outranks marginal
  EXPECT_EQ(check_stability_step(diag3(1.0, 1.2, 0.5)).classification, StabilityClass::unstable);
  // marginal outranks the zero-eigenvalue rule
  EXPECT_EQ(check_stability_step(diag3(1.0, 0.0, 0.5)).classification, StabilityClass::marginal);

  const auto r = check_stability_step(diag3(0.9, -0.95, 0.2));
  EXPECT_NEAR(r.max_magnitude, 0.95, 1e-14);

  // no forward motion: two eigenvalues sit on the unit circle
  const Gains g;
  EXPECT_EQ(check_stability_step(control_matrix_A(0.3, 0.3, 0.0, g, 0.005)).classification,
            StabilityClass::marginal);
}

TEST(CheckStabilityStep, ToleranceBand) {
  const Matrix3 a = diag3(1.0 - 1e-6, 0.5, 0.5);
  EXPECT_EQ(check_stability_step(a, 1e-9).classification, StabilityClass::stable);
  EXPECT_EQ(check_stability_step(a, 1e-5).classification, StabilityClass::marginal);
}

TEST(ContinuousErrorDynamics, Examples) {
  const Gains g{25, 64, 16};
  const ReferencePoint ref{{0, 0, 0}, 1.0, 0.3};
  const ErrorVec z = continuous_error_dynamics({0, 0, 0}, ref, g);
  EXPECT_NEAR(z.x_e, 0.0, 1e-15);
  EXPECT_NEAR(z.y_e, 0.0, 1e-15);
  EXPECT_NEAR(z.theta_e, 0.0, 1e-15);

  // eps = (0, y, 0), omega_r = 0: omega = nu Ky y, so
  // x' = omega y - nu + nu = nu Ky y^2, y' = -omega x + 0 = 0, theta' = -nu Ky y.
  const double y = 0.2;
  const ErrorVec d = continuous_error_dynamics({0, y, 0}, {{0, 0, 0}, 1.5, 0.0}, g);
  EXPECT_NEAR(d.x_e, 1.5 * 64 * y * y, 1e-12);
  EXPECT_NEAR(d.y_e, 0.0, 1e-12);
  EXPECT_NEAR(d.theta_e, -1.5 * 64 * y, 1e-12);
}

TEST(LinearizeContinuous, MatchesFiniteDifferences) {
  const double h = 1e-6;
  for (int n = 0; n < 500; ++n) {
    const Gains g{uniform(0.5, 100), uniform(0.5, 100), uniform(0.5, 30)};
    const ReferencePoint ref{{0, 0, 0}, uniform(-2, 2), uniform(-2, 2)};
    const Matrix3 a = linearize_continuous(ref, g);
    for (int j = 0; j < 3; ++j) {
      ErrorVec plus{}, minus{};
      (j == 0 ? plus.x_e : j == 1 ? plus.y_e : plus.theta_e) = h;
      (j == 0 ? minus.x_e : j == 1 ? minus.y_e : minus.theta_e) = -h;
      const ErrorVec fp = continuous_error_dynamics(plus, ref, g);
      const ErrorVec fm = continuous_error_dynamics(minus, ref, g);
      const double col[3] = {(fp.x_e - fm.x_e) / (2 * h), (fp.y_e - fm.y_e) / (2 * h),
                             (fp.theta_e - fm.theta_e) / (2 * h)};
      for (int i = 0; i < 3; ++i) {
        const double scale = std::max(1.0, std::abs(a[i][j]));
        ASSERT_NEAR(col[i], a[i][j], 1e-6 * scale) << i << "," << j;
      }
    }
  }
}

TEST(LinearizeContinuous, RemainderIsQuadratic) {
  const Gains g;
  const ReferencePoint ref{{0, 0, 0}, 1.0, 0.5};
  const Matrix3 a = linearize_continuous(ref, g);
  auto remainder = [&](double s) {
    const ErrorVec e{0.3 * s, -0.2 * s, 0.1 * s};
    const ErrorVec f = continuous_error_dynamics(e, ref, g);
    const double lin[3] = {a[0][0] * e.x_e + a[0][1] * e.y_e + a[0][2] * e.theta_e,
                           a[1][0] * e.x_e + a[1][1] * e.y_e + a[1][2] * e.theta_e,
                           a[2][0] * e.x_e + a[2][1] * e.y_e + a[2][2] * e.theta_e};
    return std::hypot(f.x_e - lin[0], f.y_e - lin[1], f.theta_e - lin[2]);
  };
  const double ratio = remainder(1e-2) / remainder(5e-3);
  EXPECT_NEAR(ratio, 4.0, 0.2);
}

TEST(LinearizeContinuous, ZeroReference) {
  const Gains g{7, 64, 16};
  const Matrix3 a = linearize_continuous({{0, 0, 0}, 0.0, 0.0}, g);
  Matrix3 expected{};
  expected[0][0] = -7;
  EXPECT_EQ(a, expected);
}

TEST(RouthHurwitz, KnownPolynomials) {
  const std::vector<double> stable4{1, 10, 35, 50, 24};  // (s+1)(s+2)(s+3)(s+4)
  EXPECT_TRUE(routh_hurwitz(stable4).stable);
  EXPECT_EQ(routh_hurwitz(stable4).sign_changes, 0);

  const std::vector<double> two_rhp{1, 0, -7, 6};  // (s-1)(s-2)(s+3)
  const RouthResult r = routh_hurwitz(two_rhp);
  EXPECT_FALSE(r.stable);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.sign_changes, 2);

  const std::vector<double> imaginary{1, 1, 1, 1};  // (s+1)(s^2+1)
  const RouthResult im = routh_hurwitz(imaginary);
  EXPECT_FALSE(im.stable);
  EXPECT_TRUE(im.degenerate);

  const std::vector<double> one_rhp{1, 4, 1, -6};  // (s-1)(s+2)(s+3)
  EXPECT_EQ(routh_hurwitz(one_rhp).sign_changes, 1);
  EXPECT_FALSE(routh_hurwitz(one_rhp).degenerate);

  const std::vector<double> symmetric{1, 2, -1, -2};  // (s-1)(s+1)(s+2)
  EXPECT_TRUE(routh_hurwitz(symmetric).degenerate);
  EXPECT_FALSE(routh_hurwitz(symmetric).stable);
  EXPECT_FALSE(routh_hurwitz(std::vector<double>{1, 0, 1, 1}).stable);
}

TEST(HurwitzCheck, DiagonalExamples) {
  EXPECT_TRUE(hurwitz_check(diag3(-1, -2, -3)).stable);
  EXPECT_FALSE(hurwitz_check(diag3(1, -1, -1)).stable);
}

TEST(HurwitzCheck, AgreesWithEigenOnRandomMatrices) {
  int checked = 0;
  for (int n = 0; n < 3000; ++n) {
    Matrix3 a = random_matrix(2.0);
    for (int i = 0; i < 3; ++i) a[i][i] -= 1.0;
    const auto ev = eigen_oracle(a);
    double max_re = -INFINITY;
    for (const cplx& z : ev) max_re = std::max(max_re, z.real());
    if (std::abs(max_re) < 1e-6) continue;  // too close to the axis to call
    ASSERT_EQ(hurwitz_check(a).stable, max_re < 0.0) << "sample " << n;
    ++checked;
  }
  EXPECT_GT(checked, 2900);
}

TEST(HurwitzCheck, TrackingLinearizationIsStableForForwardMotion) {
  for (int n = 0; n < 500; ++n) {
    const Gains g{uniform(0.1, 300), uniform(0.1, 100), uniform(0.1, 30)};
    const ReferencePoint ref{{0, 0, 0}, uniform(0.05, 3), uniform(-3, 3)};
    ASSERT_TRUE(hurwitz_check(linearize_continuous(ref, g)).stable);
  }
}

}  // namespace
}  // namespace cloudagv
