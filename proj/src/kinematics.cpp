#include "cloudagv/kinematics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace cloudagv {

double normalize_angle(double theta) noexcept {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double wrapped = std::remainder(theta, kTwoPi);  // [-pi, pi]
  if (wrapped <= -std::numbers::pi) wrapped += kTwoPi;
  return wrapped;
}

InputJacobian jacobian_J(const Pose& pose) noexcept {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  return {{{c, 0.0}, {s, 0.0}, {0.0, 1.0}}};
}

bool is_admissible(const Pose& pose) noexcept {
  return std::isfinite(pose.x) && std::isfinite(pose.y) && std::isfinite(pose.theta) &&
         std::abs(pose.x) <= kDivergenceBound && std::abs(pose.y) <= kDivergenceBound;
}

Pose step_euler(const Pose& pose, const ControlInput& u, double ts) {
  if (!(ts > 0.0)) throw std::invalid_argument("step_euler: Ts must be positive");
  const InputJacobian j = jacobian_J(pose);
  Pose next{pose.x + ts * (j[0][0] * u.nu + j[0][1] * u.omega),
            pose.y + ts * (j[1][0] * u.nu + j[1][1] * u.omega),
            pose.theta + ts * (j[2][0] * u.nu + j[2][1] * u.omega)};
  next.theta = normalize_angle(next.theta);
  if (!is_admissible(next)) {
    std::ostringstream msg;
    msg << "plant state diverged: x=" << next.x << " y=" << next.y << " theta=" << next.theta
        << " (u = " << u.nu << ", " << u.omega << ")";
    throw DivergenceError(msg.str());
  }
  return next;
}

Pose step_fine_oracle(const Pose& pose, const ControlInput& u, double ts, std::size_t substeps) {
  if (substeps == 0) throw std::invalid_argument("step_fine_oracle: substeps must be >= 1");
  if (substeps == 1) return step_euler(pose, u, ts);
  const double h = ts / static_cast<double>(substeps);
  Pose p = pose;
  for (std::size_t i = 0; i < substeps; ++i) p = step_euler(p, u, h);
  return p;
}

}  // namespace cloudagv
