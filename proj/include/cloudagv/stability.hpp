#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "cloudagv/controller.hpp"
#include "cloudagv/matrix3.hpp"

namespace cloudagv {

enum class StabilityClass { stable, marginal, unstable };

[[nodiscard]] std::string_view to_string(StabilityClass c) noexcept;

inline constexpr double kDefaultMarginTol = 1e-9;

/// Linearized closed-loop step matrix under an uplink outage of n_ul samples.
/// theta_now is the plant heading at k, theta_stale the heading at k - n_ul,
/// nu_r_stale the reference speed at k - n_ul. Every nu_r entry uses the
/// stale index. ts == 0 gives the identity.
[[nodiscard]] Matrix3 control_matrix_A(double theta_now, double theta_stale, double nu_r_stale,
                                       const Gains& g, double ts);

/// Monic characteristic polynomial det(lambda I - A) = l^3 + c2 l^2 + c1 l + c0.
struct CharPoly3 {
  double c2 = 0.0;
  double c1 = 0.0;
  double c0 = 0.0;

  [[nodiscard]] std::complex<double> operator()(std::complex<double> z) const noexcept {
    return ((z + c2) * z + c1) * z + c0;
  }
};

[[nodiscard]] CharPoly3 characteristic_polynomial(const Matrix3& a) noexcept;

struct Eigenvalues3 {
  std::array<std::complex<double>, 3> values{};  ///< descending magnitude
  bool ill_conditioned = false;                  ///< two roots (nearly) coincide
};

/// Closed-form eigenvalues of a 3x3 real matrix from its characteristic cubic
/// (trigonometric branch for three real roots, Cardano otherwise), followed by
/// a Newton polish on the cubic.
[[nodiscard]] Eigenvalues3 eigenvalues_3x3(const Matrix3& a);

struct StabilityReport {
  std::size_t k = 0;
  std::array<std::complex<double>, 3> eigenvalues{};
  double max_magnitude = 0.0;
  StabilityClass classification = StabilityClass::stable;
  std::size_t n_ul = 0;
  bool ill_conditioned = false;
};

/// Per-step discrete criterion 0 < |lambda_i| < 1 with a marginal band of
/// width tol around the unit circle. Precedence: any |lambda| > 1 + tol is
/// unstable; otherwise any |lambda| in [1 - tol, 1 + tol] is marginal;
/// otherwise any |lambda| <= tol is unstable (the strict lower bound);
/// otherwise stable. The returned k and n_ul are zero.
[[nodiscard]] StabilityReport check_stability_step(const Matrix3& a,
                                                   double tol = kDefaultMarginTol);

/// Classification on already computed magnitudes, same precedence as above.
[[nodiscard]] StabilityClass classify_magnitudes(std::span<const double> magnitudes,
                                                 double tol = kDefaultMarginTol);

/// Closed-loop continuous error dynamics with the tracking law substituted.
/// The result holds time derivatives (per second) of each error component.
[[nodiscard]] ErrorVec continuous_error_dynamics(const ErrorVec& err, const ReferencePoint& ref,
                                                 const Gains& g) noexcept;

/// Jacobian of continuous_error_dynamics at eps = 0:
///   [ -Kx      omega_r   0            ]
///   [ -omega_r 0         nu_r         ]
///   [ 0        -Ky nu_r  -Ktheta nu_r ]
[[nodiscard]] Matrix3 linearize_continuous(const ReferencePoint& ref, const Gains& g) noexcept;

struct RouthResult {
  bool stable = false;       ///< every root strictly in the left half plane
  bool degenerate = false;   ///< zero pivot or zero row met while building the array
  int sign_changes = 0;      ///< right-half-plane root count (with epsilon substitution)
  std::vector<double> first_column;
};

/// Routh array test on a real polynomial, coefficients highest degree first.
/// A zero pivot is replaced by a small positive epsilon and flagged; an all
/// zero row means roots symmetric about the origin and is reported unstable.
[[nodiscard]] RouthResult routh_hurwitz(std::span<const double> coefficients);

/// Routh test on det(sI - A). No root finding involved.
[[nodiscard]] RouthResult hurwitz_check(const Matrix3& a);

}  // namespace cloudagv
