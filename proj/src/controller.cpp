#include "cloudagv/controller.hpp"

#include <algorithm>
#include <cmath>

namespace cloudagv {

Matrix3 rotation_matrix_Te(double theta_c) noexcept {
  const double c = std::cos(theta_c);
  const double s = std::sin(theta_c);
  return {{{c, s, 0.0}, {-s, c, 0.0}, {0.0, 0.0, 1.0}}};
}

ErrorVec compute_error(const Pose& x_r, const Pose& x_c) noexcept {
  const double dx = x_r.x - x_c.x;
  const double dy = x_r.y - x_c.y;
  const double dtheta = normalize_angle(x_r.theta - x_c.theta);
  const Matrix3 te = rotation_matrix_Te(x_c.theta);
  return {te[0][0] * dx + te[0][1] * dy, te[1][0] * dx + te[1][1] * dy,
          normalize_angle(te[2][2] * dtheta)};
}

ErrorVec compute_error_stale(const Pose& x_r_now, const Pose& x_c_stale) noexcept {
  return compute_error(x_r_now, x_c_stale);
}

ControlInput control_law(const ErrorVec& err, const ReferencePoint& ref, const Gains& g) noexcept {
  return {ref.nu_r * std::cos(err.theta_e) + g.kx * err.x_e,
          ref.omega_r + ref.nu_r * (g.ky * err.y_e + g.ktheta * std::sin(err.theta_e))};
}

ControlInput saturate(const ControlInput& u, std::optional<double> nu_max) noexcept {
  if (!nu_max) return u;
  return {std::clamp(u.nu, -*nu_max, *nu_max), u.omega};
}

}  // namespace cloudagv
