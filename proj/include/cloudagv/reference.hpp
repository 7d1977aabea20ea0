#pragma once

#include <cstddef>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cloudagv/controller.hpp"

namespace cloudagv {

namespace track {

struct Line {
  double length = 10.0;
};

struct Circle {
  double radius = 5.0;
  bool ccw = true;
};

/// straight[0], arc(radii[0]), straight[1], arc(radii[1]), ..., straight[n].
/// Turn directions alternate, starting with a left turn of turn_angle.
struct SCurve {
  std::vector<double> straights{30.0, 20.0, 20.0};
  std::vector<double> radii{10.0, 10.0};
  double turn_angle = std::numbers::pi / 2.0;
};

/// Counter-clockwise lap starting at the middle of the bottom edge.
struct RoundedRectangle {
  double width = 20.0;
  double height = 10.0;
  double corner_radius = 2.0;
};

}  // namespace track

namespace speed {

/// Constant reference speed; if nu is absent it is the speed that covers the
/// path (one lap for closed paths) exactly in the total time.
struct Constant {
  std::optional<double> nu;
};

/// Accelerate at `accel` to nu_max, cruise, decelerate to rest at T.
/// If nu_max is absent it is solved so that the path is covered exactly.
struct Trapezoidal {
  double accel = 0.5;
  std::optional<double> nu_max;
};

}  // namespace speed

using TrackFamily = std::variant<track::Line, track::Circle, track::SCurve, track::RoundedRectangle>;
using SpeedProfile = std::variant<speed::Constant, speed::Trapezoidal>;

struct TrackSpec {
  TrackFamily family = track::SCurve{};
  double total_time = 100.0;  ///< s
  double ts = 0.005;          ///< s
  SpeedProfile speed = speed::Constant{1.0};
  Pose start{};  ///< pose of the path origin

  [[nodiscard]] std::size_t n_timesteps() const;  // throws if T/Ts is not an integer
};

[[nodiscard]] std::string family_name(const TrackFamily& family);

/// Reference samples k = 0..N (N + 1 points), sampled from the analytic
/// arc-length parametrization.
struct ReferenceTrajectory {
  std::vector<ReferencePoint> points;
  std::vector<double> arc_length;  ///< unwrapped distance travelled at sample k
  double ts = 0.0;
  double path_length = 0.0;
  bool closed = false;
  double max_curvature = 0.0;
  std::vector<double> segment_boundaries;  ///< arc-length positions of curvature jumps

  [[nodiscard]] std::size_t n_timesteps() const noexcept {
    return points.empty() ? 0 : points.size() - 1;
  }
};

/// Throws std::invalid_argument for invalid geometry, non-integer T/Ts,
/// or a speed profile that cannot be realized on the path.
[[nodiscard]] ReferenceTrajectory generate_track(const TrackSpec& spec);

/// CSV columns: k,x_r,y_r,theta_r,nu_r,omega_r
void write_reference_csv(std::ostream& os, const ReferenceTrajectory& traj);

}  // namespace cloudagv
