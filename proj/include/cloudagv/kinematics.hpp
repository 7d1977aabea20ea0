#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace cloudagv {

/// Planar configuration of an AGV or of a reference point.
struct Pose {
  double x = 0.0;      ///< m
  double y = 0.0;      ///< m
  double theta = 0.0;  ///< rad, heading w.r.t. the x-axis, kept in (-pi, pi]

  friend bool operator==(const Pose&, const Pose&) = default;
};

/// Translational / rotational velocity pair applied to the unicycle plant.
struct ControlInput {
  double nu = 0.0;     ///< m/s
  double omega = 0.0;  ///< rad/s

  friend bool operator==(const ControlInput&, const ControlInput&) = default;
};

/// 3x2 input map of the unicycle, row-major.
using InputJacobian = std::array<std::array<double, 2>, 3>;

/// Raised when the plant state leaves the admissible region
/// (non-finite or beyond kDivergenceBound in x or y).
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr double kDivergenceBound = 1e6;  // m

/// Wraps an angle into (-pi, pi].
[[nodiscard]] double normalize_angle(double theta) noexcept;

[[nodiscard]] InputJacobian jacobian_J(const Pose& pose) noexcept;

/// True if the pose is finite and inside the divergence bound.
[[nodiscard]] bool is_admissible(const Pose& pose) noexcept;

/// One explicit Euler step of the unicycle under a held input:
/// X(k+1) = X(k) + Ts * J(theta(k)) * u(k). Throws DivergenceError.
[[nodiscard]] Pose step_euler(const Pose& pose, const ControlInput& u, double ts);

/// Fine-step reference integrator: `substeps` Euler steps of size ts/substeps
/// under the same held input. Converges to the zero-order-hold solution.
[[nodiscard]] Pose step_fine_oracle(const Pose& pose, const ControlInput& u, double ts,
                                    std::size_t substeps);

}  // namespace cloudagv
