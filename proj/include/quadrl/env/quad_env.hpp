#pragma once

#include <array>
#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "quadrl/common/random.hpp"
#include "quadrl/control/attitude.hpp"
#include "quadrl/sim/dynamics.hpp"

namespace quadrl::env {

inline constexpr int kObservationSize = 12;

/// (phi, theta, psi, vx, vy, vz, wx, wy, wz, dx, dy, dz) with d = target - position.
using Observation = std::array<double, kObservationSize>;

struct RewardParams {
  double scale = 7.0;             // `a`
  double sigma = 0.5;             // m
  double distance_floor = 1e-3;   // m

  void validate() const;
};

struct Box {
  Eigen::Vector3d lo = Eigen::Vector3d::Zero();
  Eigen::Vector3d hi = Eigen::Vector3d::Zero();

  bool contains(const Eigen::Vector3d& p) const;
  bool contains(const Box& other) const;
};

struct EnvConfig {
  double agent_frequency = 50.0;  // Hz
  int max_steps = 502;
  Box flight_bounds{{-3.0, -3.0, 0.0}, {3.0, 3.0, 3.0}};
  Box init_position_range{{-1.5, -1.5, 0.5}, {1.5, 1.5, 1.5}};
  Box target_range{{-1.5, -1.5, 0.5}, {1.5, 1.5, 1.5}};
  double crash_altitude = 0.02;   // m
  double attitude_abort = 1.2;    // rad, on |roll| or |pitch|
  double crash_penalty = -50.0;   // reward on the transition into a failure
  double rpm_action_scale = 0.05;

  double agent_period() const { return 1.0 / agent_frequency; }
  void validate() const;
};

/// Everything needed to build an environment.
struct EnvSettings {
  sim::QuadParams quad;
  control::PidGains pid;
  EnvConfig env;
  RewardParams reward;

  void validate() const;
};

enum class EpisodeStatus { Running, MaxSteps, Crashed, OutOfBounds, NonFinite };

const char* to_string(EpisodeStatus status);

/// True for failures that end the episode without bootstrapping.
inline bool is_failure(EpisodeStatus s) {
  return s == EpisodeStatus::Crashed || s == EpisodeStatus::OutOfBounds ||
         s == EpisodeStatus::NonFinite;
}

enum class Task { Stabilize, TrackRandom };

const char* to_string(Task task);
Task parse_task(const std::string& text);

Observation observe(const sim::QuadState& state, const Eigen::Vector3d& target);

/// Dense tracking reward on the position error `delta`.
double reward(const Eigen::Vector3d& delta, const RewardParams& params);

EpisodeStatus terminal_status(const sim::QuadState& state, int step, const EnvConfig& cfg);

struct ResetSample {
  sim::QuadState state;
  Eigen::Vector3d target;
};

inline const Eigen::Vector3d kStabilizeTarget{0.0, 0.0, 1.0};

ResetSample sample_reset(Task task, const EnvConfig& cfg, const sim::QuadParams& quad,
                         RandomSource& rng);

/// Level, at-rest state at `position` with rotors spinning at hover.
sim::QuadState resting_state(const Eigen::Vector3d& position, const sim::QuadParams& quad);

struct StepResult {
  Observation observation{};
  double reward = 0.0;
  EpisodeStatus status = EpisodeStatus::Running;
};

/// Episodic environment. One agent step holds the decoded action for
/// physics substeps; thrust-vector actions run the attitude PID every substep.
class QuadEnv {
 public:
  QuadEnv(EnvSettings settings, control::ActionSpace space, Task task, std::uint64_t seed);

  Observation reset();
  Observation reset_to(const Eigen::Vector3d& position, const Eigen::Vector3d& target);

  /// Throws EpisodeFinished once a terminal status has been reached.
  StepResult step(const control::ControlAction& action);

  /// Moves the goal mid-episode (path following).
  void set_target(const Eigen::Vector3d& target) { target_ = target; }

  Observation observation() const { return observe(state_, target_); }
  const sim::QuadState& state() const { return state_; }
  const Eigen::Vector3d& target() const { return target_; }
  const EnvSettings& settings() const { return settings_; }
  EnvSettings& mutable_settings() { return settings_; }
  control::ActionSpace action_space() const { return space_; }
  Task task() const { return task_; }
  int steps() const { return steps_; }
  double time() const { return steps_ * substeps_ * settings_.quad.physics_dt; }
  EpisodeStatus status() const { return status_; }
  int substeps() const { return substeps_; }
  /// Substeps in which the mixer had to clamp, since the last reset.
  int saturated_substeps() const { return saturated_; }
  RandomSource& rng() { return rng_; }

 private:
  void start(const ResetSample& sample);

  EnvSettings settings_;
  control::ActionSpace space_;
  Task task_;
  RandomSource rng_;
  int substeps_;
  sim::QuadState state_;
  Eigen::Vector3d target_ = kStabilizeTarget;
  control::PidState pid_;
  int steps_ = 0;
  int saturated_ = 0;
  EpisodeStatus status_ = EpisodeStatus::Running;
};

}  // namespace quadrl::env
