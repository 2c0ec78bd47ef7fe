#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "quadrl/app/config.hpp"
#include "quadrl/eval/metrics.hpp"
#include "quadrl/eval/trajectory.hpp"

namespace quadrl::app {

struct EvalOptions {
  int episodes = 10;
  std::optional<Eigen::Vector3d> initial;  // fixed start, else sampled per task
  std::optional<Eigen::Vector3d> target;   // fixed target, else sampled per task
  std::uint64_t seed = 12345;
};

struct EpisodeEval {
  Eigen::Vector3d initial = Eigen::Vector3d::Zero();
  Eigen::Vector3d target = Eigen::Vector3d::Zero();
  eval::TrajectoryLog log;
  eval::TrackingMetrics metrics;
};

struct EvalReport {
  std::vector<EpisodeEval> episodes;
  /// Per-field mean over episodes; settling time averages settled episodes only.
  eval::TrackingMetrics aggregate;

  /// Episodes whose last sample lies within `radius` of the target.
  int ended_within(double radius) const;
};

/// Deterministic step-response episodes under `cfg`'s environment.
EvalReport evaluate(const eval::Policy& policy, const RunConfig& cfg, const EvalOptions& options);

/// Header: episode,initial_x..z,target_x..z,status,complete,steady_state_error_x..z,
/// overshoot_x..z,settling_time,rms_path_error,final_error. The last row is `mean`.
void write_metrics_csv(const std::filesystem::path& path, const EvalReport& report);

/// Single-row metrics file for a path-following run.
void write_path_metrics_csv(const std::filesystem::path& path, const eval::TrajectoryLog& log,
                            const eval::TrackingMetrics& metrics);

}  // namespace quadrl::app
