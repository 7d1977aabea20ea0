#pragma once

#include <optional>

#include "cloudagv/kinematics.hpp"
#include "cloudagv/matrix3.hpp"

namespace cloudagv {

/// Tracking error expressed in the AGV body frame.
struct ErrorVec {
  double x_e = 0.0;      ///< m, longitudinal
  double y_e = 0.0;      ///< m, lateral
  double theta_e = 0.0;  ///< rad, in (-pi, pi]

  friend bool operator==(const ErrorVec&, const ErrorVec&) = default;
};

/// Feedback gains of the tracking law. Units follow the usual convention
/// for this controller (Kx in 1/s, Ky and Ktheta as listed with the law);
/// they are plain positive reals here.
struct Gains {
  double kx = 25.0;
  double ky = 64.0;
  double ktheta = 16.0;

  [[nodiscard]] bool valid() const noexcept { return kx > 0.0 && ky > 0.0 && ktheta > 0.0; }
};

/// A sample of the reference path together with its feedforward velocities.
struct ReferencePoint {
  Pose pose;
  double nu_r = 0.0;     ///< m/s
  double omega_r = 0.0;  ///< rad/s
};

/// World-to-body rotation for heading theta_c.
[[nodiscard]] Matrix3 rotation_matrix_Te(double theta_c) noexcept;

/// eps = Te(theta_c) (X_r - X_c). The heading difference is wrapped before
/// the rotation and theta_e is wrapped again afterwards.
[[nodiscard]] ErrorVec compute_error(const Pose& x_r, const Pose& x_c) noexcept;

/// Error seen by the cloud during an uplink outage: current reference against
/// the last received plant state (rotation taken from that stale state too).
/// With no outage this is exactly compute_error.
[[nodiscard]] ErrorVec compute_error_stale(const Pose& x_r_now, const Pose& x_c_stale) noexcept;

/// nu = nu_r cos(theta_e) + Kx x_e
/// omega = omega_r + nu_r (Ky y_e + Ktheta sin(theta_e))
[[nodiscard]] ControlInput control_law(const ErrorVec& err, const ReferencePoint& ref,
                                       const Gains& g) noexcept;

/// Clamps nu into [-nu_max, nu_max]; omega is never limited.
[[nodiscard]] ControlInput saturate(const ControlInput& u, std::optional<double> nu_max) noexcept;

}  // namespace cloudagv
