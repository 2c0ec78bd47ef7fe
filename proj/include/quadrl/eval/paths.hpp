#pragma once

#include <filesystem>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace quadrl::eval {

/// Climbing circle that starts at `start` and circles a center `radius` metres
/// in -x from it.
struct Helix {
  double radius = 1.0;
  double height = 1.0;
  double turns = 1.0;
  double duration = 10.0;
  Eigen::Vector3d start{0.0, 0.0, 1.0};

  Eigen::Vector3d center() const { return start - Eigen::Vector3d(radius, 0.0, 0.0); }
};

/// Gerono figure eight at constant height: x = w sin(wt), y = w sin(wt) cos(wt).
struct Lemniscate {
  double half_width = 1.0;
  double height = 1.0;
  double duration = 10.0;
  Eigen::Vector2d center{0.0, 0.0};
};

struct Waypoint {
  double t = 0.0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
};

/// Piecewise-linear interpolation between timed points; first point at t = 0.
struct WaypointList {
  std::vector<Waypoint> points;
};

using PathSpec = std::variant<Helix, Lemniscate, WaypointList>;

double duration(const PathSpec& spec);

/// Throws ConfigError on non-positive geometry or durations.
void validate(const PathSpec& spec);

/// Reference point at time t in [0, duration]; OutOfDomain otherwise.
Eigen::Vector3d sample_path(const PathSpec& spec, double t);

/// Reads `t,x,y,z` CSV. Errors carry the file name and line number.
WaypointList read_waypoints(const std::filesystem::path& path);

}  // namespace quadrl::eval
