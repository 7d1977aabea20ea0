#include "cloudagv/stability.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cloudagv {

std::string_view to_string(StabilityClass c) noexcept {
  switch (c) {
    case StabilityClass::stable:
      return "stable";
    case StabilityClass::marginal:
      return "marginal";
    case StabilityClass::unstable:
      return "unstable";
  }
  return "unknown";
}

Matrix3 control_matrix_A(double theta_now, double theta_stale, double nu_r_stale, const Gains& g,
                         double ts) {
  if (!(ts >= 0.0)) throw std::invalid_argument("control_matrix_A: Ts must be non-negative");
  const double cn = std::cos(theta_now);
  const double sn = std::sin(theta_now);
  const double cs = std::cos(theta_stale);
  const double ss = std::sin(theta_stale);
  const double v = nu_r_stale;
  return {{
      {1.0 - ts * g.kx * cn * cs, -ts * g.kx * cn * ss, -ts * sn * v},
      {-ts * g.kx * sn * cs, 1.0 - ts * g.kx * sn * ss, ts * cn * v},
      {ts * g.ky * ss * v, -ts * g.ky * cs * v, 1.0 - ts * g.ktheta * v},
  }};
}

CharPoly3 characteristic_polynomial(const Matrix3& a) noexcept {
  return {-trace(a), principal_minor_sum(a), -determinant(a)};
}

namespace {

using cplx = std::complex<double>;

// Roots of the monic cubic z^3 + a z^2 + b z + c.
std::array<cplx, 3> solve_monic_cubic(double a, double b, double c) {
  const double q = (a * a - 3.0 * b) / 9.0;
  const double r = (2.0 * a * a * a - 9.0 * a * b + 27.0 * c) / 54.0;
  const double q3 = q * q * q;
  const double shift = a / 3.0;
  if (r * r < q3) {
    const double sq = std::sqrt(q);
    const double phi = std::acos(std::clamp(r / std::sqrt(q3), -1.0, 1.0));
    constexpr double kTwoPi = 2.0 * std::numbers::pi;
    return {cplx(-2.0 * sq * std::cos(phi / 3.0) - shift, 0.0),
            cplx(-2.0 * sq * std::cos((phi + kTwoPi) / 3.0) - shift, 0.0),
            cplx(-2.0 * sq * std::cos((phi - kTwoPi) / 3.0) - shift, 0.0)};
  }
  const double big = -std::copysign(std::cbrt(std::abs(r) + std::sqrt(r * r - q3)), r);
  const double small = big == 0.0 ? 0.0 : q / big;
  const double re = -0.5 * (big + small) - shift;
  const double im = 0.5 * std::sqrt(3.0) * (big - small);
  return {cplx(big + small - shift, 0.0), cplx(re, im), cplx(re, -im)};
}

cplx polish_root(const CharPoly3& p, cplx z) {
  for (int iter = 0; iter < 4; ++iter) {
    const cplx f = p(z);
    const cplx df = (3.0 * z + 2.0 * p.c2) * z + p.c1;
    if (std::abs(df) == 0.0) break;
    const cplx candidate = z - f / df;
    if (!(std::abs(p(candidate)) < std::abs(f))) break;
    z = candidate;
  }
  return z;
}

}  // namespace

Eigenvalues3 eigenvalues_3x3(const Matrix3& a) {
  const CharPoly3 poly = characteristic_polynomial(a);

  // Scale lambda = s * mu so the cubic coefficients are O(1).
  double scale = std::max({std::abs(poly.c2), std::sqrt(std::abs(poly.c1)),
                           std::cbrt(std::abs(poly.c0))});
  if (!(scale > 0.0)) scale = 1.0;
  auto roots = solve_monic_cubic(poly.c2 / scale, poly.c1 / (scale * scale),
                                 poly.c0 / (scale * scale * scale));

  Eigenvalues3 out;
  for (std::size_t i = 0; i < 3; ++i) {
    cplx z = roots[i] * scale;
    z = polish_root(poly, z);
    // Real input: keep real roots real and conjugate pairs exact.
    if (std::abs(z.imag()) <= 1e-14 * std::max(1.0, std::abs(z))) z = cplx(z.real(), 0.0);
    out.values[i] = z;
  }
  if (out.values[1].imag() != 0.0 && out.values[2].imag() != 0.0) {
    const cplx avg = 0.5 * (out.values[1] + std::conj(out.values[2]));
    out.values[1] = cplx(avg.real(), std::abs(avg.imag()));
    out.values[2] = std::conj(out.values[1]);
  }

  std::sort(out.values.begin(), out.values.end(), [](const cplx& l, const cplx& r) {
    const double ml = std::abs(l);
    const double mr = std::abs(r);
    if (ml != mr) return ml > mr;
    if (l.real() != r.real()) return l.real() > r.real();
    return l.imag() > r.imag();
  });

  const double gap_tol = 1e-6 * std::max(1.0, scale);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j)
      if (std::abs(out.values[i] - out.values[j]) < gap_tol) out.ill_conditioned = true;
  return out;
}

StabilityClass classify_magnitudes(std::span<const double> magnitudes, double tol) {
  if (tol < 0.0) throw std::invalid_argument("stability tolerance must be non-negative");
  bool marginal = false;
  bool vanishing = false;
  for (double m : magnitudes) {
    if (!(m <= 1.0 + tol)) return StabilityClass::unstable;  // also catches NaN
    if (m >= 1.0 - tol) marginal = true;
    if (m <= tol) vanishing = true;
  }
  if (marginal) return StabilityClass::marginal;
  if (vanishing) return StabilityClass::unstable;
  return StabilityClass::stable;
}

StabilityReport check_stability_step(const Matrix3& a, double tol) {
  const Eigenvalues3 eig = eigenvalues_3x3(a);
  StabilityReport report;
  report.eigenvalues = eig.values;
  report.ill_conditioned = eig.ill_conditioned;
  std::array<double, 3> mags{};
  for (std::size_t i = 0; i < 3; ++i) mags[i] = std::abs(eig.values[i]);
  report.max_magnitude = *std::max_element(mags.begin(), mags.end());
  report.classification = classify_magnitudes(mags, tol);
  return report;
}

ErrorVec continuous_error_dynamics(const ErrorVec& err, const ReferencePoint& ref,
                                   const Gains& g) noexcept {
  const ControlInput u = control_law(err, ref, g);
  return {u.omega * err.y_e - u.nu + ref.nu_r * std::cos(err.theta_e),
          -u.omega * err.x_e + ref.nu_r * std::sin(err.theta_e), ref.omega_r - u.omega};
}

Matrix3 linearize_continuous(const ReferencePoint& ref, const Gains& g) noexcept {
  const double v = ref.nu_r;
  const double w = ref.omega_r;
  return {{
      {-g.kx, w, 0.0},
      {-w, 0.0, v},
      {0.0, -g.ky * v, -g.ktheta * v},
  }};
}

RouthResult routh_hurwitz(std::span<const double> coefficients) {
  // Strip leading zeros; the polynomial degree is what remains.
  std::size_t lead = 0;
  while (lead < coefficients.size() && coefficients[lead] == 0.0) ++lead;
  if (lead == coefficients.size()) throw std::invalid_argument("routh_hurwitz: zero polynomial");
  const std::vector<double> c(coefficients.begin() + static_cast<std::ptrdiff_t>(lead),
                              coefficients.end());
  const std::size_t degree = c.size() - 1;

  RouthResult result;
  double mag = 0.0;
  for (double v : c) mag = std::max(mag, std::abs(v));
  const double eps = 1e-12 * mag;

  const std::size_t width = degree / 2 + 1;
  std::vector<double> upper(width, 0.0);
  std::vector<double> lower(width, 0.0);
  for (std::size_t i = 0; i <= degree; ++i) (i % 2 == 0 ? upper : lower)[i / 2] = c[i];

  result.first_column.push_back(upper[0]);
  for (std::size_t row = 1; row <= degree; ++row) {
    const bool all_zero =
        std::all_of(lower.begin(), lower.end(), [](double v) { return v == 0.0; });
    if (all_zero) {
      // Roots symmetric about the origin; cannot be strictly Hurwitz.
      result.degenerate = true;
      result.stable = false;
      result.first_column.push_back(0.0);
      return result;
    }
    if (lower[0] == 0.0) {
      result.degenerate = true;
      lower[0] = eps;
    }
    result.first_column.push_back(lower[0]);
    std::vector<double> next(width, 0.0);
    for (std::size_t j = 0; j + 1 < width; ++j) {
      next[j] = (lower[0] * upper[j + 1] - upper[0] * lower[j + 1]) / lower[0];
    }
    upper = std::move(lower);
    lower = std::move(next);
  }

  for (std::size_t i = 1; i < result.first_column.size(); ++i) {
    if ((result.first_column[i] > 0.0) != (result.first_column[i - 1] > 0.0)) {
      ++result.sign_changes;
    }
  }
  result.stable = !result.degenerate && result.sign_changes == 0;
  return result;
}

RouthResult hurwitz_check(const Matrix3& a) {
  const CharPoly3 p = characteristic_polynomial(a);
  const std::array<double, 4> coeffs{1.0, p.c2, p.c1, p.c0};
  return routh_hurwitz(coeffs);
}

}  // namespace cloudagv
