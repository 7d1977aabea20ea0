#include "cloudagv/reference.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace cloudagv {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

struct Segment {
  double length = 0.0;
  double curvature = 0.0;  // signed, positive turns left
};

struct Path {
  std::vector<Segment> segments;
  bool closed = false;
};

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string("track: ") + what + " must be positive");
  }
}

Path build_path(const TrackFamily& family) {
  return std::visit(
      Overloaded{
          [](const track::Line& l) {
            require_positive(l.length, "line length");
            return Path{{{l.length, 0.0}}, false};
          },
          [](const track::Circle& c) {
            require_positive(c.radius, "circle radius");
            const double k = (c.ccw ? 1.0 : -1.0) / c.radius;
            return Path{{{2.0 * std::numbers::pi * c.radius, k}}, true};
          },
          [](const track::SCurve& s) {
            if (s.straights.size() != s.radii.size() + 1) {
              throw std::invalid_argument("track: s-curve needs one more straight than arcs");
            }
            require_positive(s.turn_angle, "s-curve turn angle");
            Path p;
            double direction = 1.0;
            for (std::size_t i = 0; i < s.straights.size(); ++i) {
              if (s.straights[i] < 0.0 || !std::isfinite(s.straights[i])) {
                throw std::invalid_argument("track: s-curve straight lengths must be >= 0");
              }
              if (s.straights[i] > 0.0) p.segments.push_back({s.straights[i], 0.0});
              if (i < s.radii.size()) {
                require_positive(s.radii[i], "s-curve radius");
                p.segments.push_back({s.turn_angle * s.radii[i], direction / s.radii[i]});
                direction = -direction;
              }
            }
            if (p.segments.empty()) throw std::invalid_argument("track: empty s-curve");
            return p;
          },
          [](const track::RoundedRectangle& r) {
            require_positive(r.width, "rectangle width");
            require_positive(r.height, "rectangle height");
            require_positive(r.corner_radius, "rectangle corner radius");
            if (2.0 * r.corner_radius > std::min(r.width, r.height)) {
              throw std::invalid_argument("track: corner radius exceeds half the rectangle side");
            }
            const double arc = 0.5 * std::numbers::pi * r.corner_radius;
            const double k = 1.0 / r.corner_radius;
            const double w = r.width - 2.0 * r.corner_radius;
            const double h = r.height - 2.0 * r.corner_radius;
            Path p;
            p.closed = true;
            // Start mid bottom edge heading +x.
            auto straight = [&p](double len) {
              if (len > 0.0) p.segments.push_back({len, 0.0});
            };
            straight(0.5 * w);
            p.segments.push_back({arc, k});
            straight(h);
            p.segments.push_back({arc, k});
            straight(w);
            p.segments.push_back({arc, k});
            straight(h);
            p.segments.push_back({arc, k});
            straight(0.5 * w);
            return p;
          },
      },
      family);
}

// Pose reached after travelling `len` along a segment of constant curvature.
Pose advance(const Pose& from, const Segment& seg, double len) {
  if (seg.curvature == 0.0) {
    return {from.x + len * std::cos(from.theta), from.y + len * std::sin(from.theta), from.theta};
  }
  const double k = seg.curvature;
  const double th = from.theta + k * len;
  return {from.x + (std::sin(th) - std::sin(from.theta)) / k,
          from.y - (std::cos(th) - std::cos(from.theta)) / k, th};
}

struct SpeedLaw {
  // distance and speed at time t
  double accel = 0.0;
  double cruise = 0.0;
  double total_time = 0.0;
  bool trapezoidal = false;

  [[nodiscard]] double distance(double t) const {
    if (!trapezoidal) return cruise * t;
    const double ta = cruise / accel;
    if (t <= ta) return 0.5 * accel * t * t;
    const double tb = total_time - ta;
    if (t <= tb) return 0.5 * cruise * ta + cruise * (t - ta);
    const double tau = std::max(0.0, total_time - t);
    return cruise * (total_time - ta) - 0.5 * accel * tau * tau;
  }
  [[nodiscard]] double speed(double t) const {
    if (!trapezoidal) return cruise;
    const double ta = cruise / accel;
    if (t <= ta) return accel * t;
    if (t <= total_time - ta) return cruise;
    return accel * std::max(0.0, total_time - t);
  }
  [[nodiscard]] double total_distance() const { return distance(total_time); }
};

SpeedLaw build_speed(const SpeedProfile& profile, double path_length, double total_time) {
  return std::visit(
      Overloaded{
          [&](const speed::Constant& c) {
            const double nu = c.nu.value_or(path_length / total_time);
            if (!std::isfinite(nu) || nu < 0.0) {
              throw std::invalid_argument("track: required constant speed is not finite");
            }
            return SpeedLaw{0.0, nu, total_time, false};
          },
          [&](const speed::Trapezoidal& tz) {
            require_positive(tz.accel, "trapezoidal acceleration");
            double v = 0.0;
            if (tz.nu_max) {
              v = *tz.nu_max;
              require_positive(v, "trapezoidal nu_max");
            } else {
              // L = v (T - v / a)  =>  v^2 - a T v + a L = 0, smaller root.
              const double a = tz.accel;
              const double disc = a * a * total_time * total_time - 4.0 * a * path_length;
              v = 0.5 * (a * total_time - std::sqrt(disc));
              if (!std::isfinite(v)) {
                throw std::invalid_argument(
                    "track: no trapezoidal speed covers the path in the given time");
              }
            }
            if (2.0 * v / tz.accel > total_time * (1.0 + 1e-12)) {
              throw std::invalid_argument(
                  "track: trapezoidal profile cannot reach nu_max within the total time");
            }
            return SpeedLaw{tz.accel, v, total_time, true};
          },
      },
      profile);
}

}  // namespace

std::size_t TrackSpec::n_timesteps() const {
  require_positive(total_time, "total time");
  require_positive(ts, "sampling time");
  const double ratio = total_time / ts;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio)) {
    throw std::invalid_argument("track: total time must be a positive integer multiple of Ts");
  }
  return static_cast<std::size_t>(n);
}

std::string family_name(const TrackFamily& family) {
  return std::visit(Overloaded{
                        [](const track::Line&) { return std::string("line"); },
                        [](const track::Circle&) { return std::string("circle"); },
                        [](const track::SCurve&) { return std::string("s-curve"); },
                        [](const track::RoundedRectangle&) {
                          return std::string("rounded-rectangle");
                        },
                    },
                    family);
}

ReferenceTrajectory generate_track(const TrackSpec& spec) {
  const std::size_t n = spec.n_timesteps();
  if (!is_admissible(spec.start)) throw std::invalid_argument("track: invalid start pose");
  const Path path = build_path(spec.family);

  std::vector<Pose> seg_start;
  std::vector<double> seg_offset;
  double length = 0.0;
  double max_k = 0.0;
  Pose cursor = spec.start;
  for (const auto& seg : path.segments) {
    seg_start.push_back(cursor);
    seg_offset.push_back(length);
    cursor = advance(cursor, seg, seg.length);
    length += seg.length;
    max_k = std::max(max_k, std::abs(seg.curvature));
  }

  const SpeedLaw law = build_speed(spec.speed, length, spec.total_time);
  if (!path.closed && law.total_distance() > length * (1.0 + 1e-9)) {
    throw std::invalid_argument("track: speed profile runs past the end of an open path");
  }

  ReferenceTrajectory traj;
  traj.ts = spec.ts;
  traj.path_length = length;
  traj.closed = path.closed;
  traj.max_curvature = max_k;
  for (std::size_t i = 1; i < path.segments.size(); ++i) {
    if (path.segments[i].curvature != path.segments[i - 1].curvature) {
      traj.segment_boundaries.push_back(seg_offset[i]);
    }
  }
  traj.points.reserve(n + 1);
  traj.arc_length.reserve(n + 1);

  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * spec.ts;
    const double s_total = law.distance(t);
    double s = s_total;
    if (path.closed) {
      s = std::fmod(s_total, length);
    } else {
      s = std::min(s, length);
    }
    // Right-continuous segment lookup: a boundary belongs to the next segment.
    auto it = std::upper_bound(seg_offset.begin(), seg_offset.end(), s);
    std::size_t idx = static_cast<std::size_t>(std::distance(seg_offset.begin(), it));
    idx = idx == 0 ? 0 : idx - 1;
    const Segment& seg = path.segments[idx];
    Pose pose = advance(seg_start[idx], seg, s - seg_offset[idx]);
    pose.theta = normalize_angle(pose.theta);
    const double v = law.speed(t);
    traj.points.push_back({pose, v, seg.curvature * v});
    traj.arc_length.push_back(s_total);
  }
  return traj;
}

void write_reference_csv(std::ostream& os, const ReferenceTrajectory& traj) {
  os << "k,x_r,y_r,theta_r,nu_r,omega_r\n";
  os << std::setprecision(17);
  for (std::size_t k = 0; k < traj.points.size(); ++k) {
    const auto& p = traj.points[k];
    os << k << ',' << p.pose.x << ',' << p.pose.y << ',' << p.pose.theta << ',' << p.nu_r << ','
       << p.omega_r << '\n';
  }
}

}  // namespace cloudagv
