#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "quadrl/env/quad_env.hpp"
#include "quadrl/eval/paths.hpp"

namespace quadrl::eval {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

struct TrajectorySample {
  double t = 0.0;
  Eigen::Vector3d reference = Eigen::Vector3d::Zero();
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d euler = Eigen::Vector3d::Zero();
  /// Action that produced this sample; NaN where absent (first row, unused slots).
  std::array<double, 4> action{kMissing, kMissing, kMissing, kMissing};
};

struct TrajectoryLog {
  std::vector<TrajectorySample> samples;
  env::EpisodeStatus status = env::EpisodeStatus::Running;
  /// False when the rollout ended in a failure before its planned length.
  bool complete = true;
};

/// Header: t,rx,ry,rz,x,y,z,phi,theta,psi,a0,a1,a2,a3
void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryLog& log);
TrajectoryLog read_trajectory_csv(const std::filesystem::path& path);

using Policy = std::function<Eigen::VectorXd(const env::Observation&)>;

/// Holds a fixed target from `initial` until the episode ends (max_steps or failure).
TrajectoryLog run_step_response(const Policy& policy, env::QuadEnv& env,
                                const Eigen::Vector3d& initial, const Eigen::Vector3d& target);

/// Starts at the path's first point and feeds the moving reference as the
/// observation target every agent step. Produces duration * frequency + 1
/// samples unless the episode fails first.
TrajectoryLog follow_path(const Policy& policy, const PathSpec& spec, env::QuadEnv& env);

}  // namespace quadrl::eval
