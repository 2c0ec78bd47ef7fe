#pragma once

#include <array>
#include <string>
#include <variant>

#include <Eigen/Core>

#include "quadrl/sim/dynamics.hpp"

namespace quadrl::control {

/// Proposed action space: thrust fraction plus desired roll and pitch, all in [-1, 1].
struct ThrustVectorAction {
  double thrust = -1.0;
  double roll = 0.0;   // rad
  double pitch = 0.0;  // rad
};

/// Baseline action space: one normalized command per rotor, in [-1, 1].
struct RpmAction {
  std::array<double, 4> rotor{};
};

using ControlAction = std::variant<ThrustVectorAction, RpmAction>;

enum class ActionSpace { ThrustVector, Rpm };

int action_dim(ActionSpace space);
const char* to_string(ActionSpace space);
ActionSpace parse_action_space(const std::string& text);

/// Builds the variant for `space` from a raw network output of length action_dim(space).
ControlAction make_action(ActionSpace space, const double* raw);

struct AttitudeSetpoint {
  double thrust_fraction = 0.0;  // of maximum total thrust
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

struct AxisGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
  double integral_limit = 1.0;  // rad s
};

/// Attitude PID gains, torque per radian. Defaults were certified by the
/// closed-loop 5 degree roll recovery test.
struct PidGains {
  AxisGains roll{5.6e-3, 2.0e-3, 4.5e-4, 0.3};
  AxisGains pitch{5.6e-3, 2.0e-3, 4.5e-4, 0.3};
  AxisGains yaw{2.2e-3, 0.0, 4.3e-4, 0.3};

  void validate() const;
};

struct PidState {
  Eigen::Vector3d integral = Eigen::Vector3d::Zero();
};

ControlAction clamp_action(ControlAction action);

AttitudeSetpoint decode_thrust_vector_action(const ThrustVectorAction& action, double current_yaw);

/// rpm_i = hover * (1 + scale * a_i), clamped to actuator limits.
sim::MotorCommand decode_rpm_action(const RpmAction& action, const sim::QuadParams& params,
                                    double scale = 0.05);

struct MixResult {
  sim::MotorCommand command;
  bool feasible = true;  // false when an rpm^2 went negative or exceeded rpm_max^2
};

/// Inverts rotor_forces on the unsaturated region.
MixResult mix_to_rpms(double thrust, const Eigen::Vector3d& torque, const sim::QuadParams& params);

double max_total_thrust(const sim::QuadParams& params);

struct PidOutput {
  sim::MotorCommand command;
  PidState state;
  Eigen::Vector3d torque = Eigen::Vector3d::Zero();
  bool saturated = false;
};

/// One attitude-loop update. Derivative action uses measured body rates.
PidOutput attitude_pid_step(const sim::QuadState& state, const AttitudeSetpoint& sp,
                            const PidGains& gains, const PidState& pid, double dt,
                            const sim::QuadParams& params);

}  // namespace quadrl::control
