#pragma once

#include <Eigen/Core>

#include "quadrl/eval/trajectory.hpp"

namespace quadrl::eval {

enum class MetricsMode { StepResponse, PathTracking };

struct MetricsOptions {
  double settling_band = 0.05;   // m, on the 3-D error
  double steady_window = 1.0;    // s, trailing window for steady-state error
};

struct TrackingMetrics {
  Eigen::Vector3d steady_state_error = Eigen::Vector3d::Zero();  // m
  Eigen::Vector3d overshoot = Eigen::Vector3d::Zero();           // % of initial error
  double settling_time = kMissing;  // s; NaN when the error never stays in band
  double rms_path_error = 0.0;      // m
  double final_error = 0.0;         // m, 3-D error at the last sample
  bool complete = true;             // copied from the log; metrics of a failed run are flagged

  bool settled() const { return settling_time == settling_time; }
};

/// Throws ModeMismatch for StepResponse on a moving reference.
TrackingMetrics compute_metrics(const TrajectoryLog& log, MetricsMode mode,
                                const MetricsOptions& options = {});

}  // namespace quadrl::eval
