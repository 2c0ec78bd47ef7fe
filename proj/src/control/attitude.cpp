#include "quadrl/control/attitude.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>

#include "quadrl/common/errors.hpp"

namespace quadrl::control {

int action_dim(ActionSpace space) { return space == ActionSpace::ThrustVector ? 3 : 4; }

const char* to_string(ActionSpace space) {
  return space == ActionSpace::ThrustVector ? "thrust_vector" : "rpm";
}

ActionSpace parse_action_space(const std::string& text) {
  if (text == "thrust_vector") return ActionSpace::ThrustVector;
  if (text == "rpm") return ActionSpace::Rpm;
  throw ConfigError("unknown action space '" + text + "' (expected thrust_vector or rpm)");
}

ControlAction make_action(ActionSpace space, const double* raw) {
  if (space == ActionSpace::ThrustVector) return ThrustVectorAction{raw[0], raw[1], raw[2]};
  return RpmAction{{raw[0], raw[1], raw[2], raw[3]}};
}

namespace {

void check_axis(const AxisGains& g, const char* name) {
  const std::string axis(name);
  if (!(g.kp > 0.0)) throw ConfigError("pid." + axis + "_kp must be > 0");
  if (!(g.ki >= 0.0)) throw ConfigError("pid." + axis + "_ki must be >= 0");
  if (!(g.kd >= 0.0)) throw ConfigError("pid." + axis + "_kd must be >= 0");
  if (!(g.integral_limit > 0.0)) throw ConfigError("pid." + axis + "_integral_limit must be > 0");
}

double unit_clamp(double v) { return std::clamp(v, -1.0, 1.0); }

}  // namespace

void PidGains::validate() const {
  check_axis(roll, "roll");
  check_axis(pitch, "pitch");
  check_axis(yaw, "yaw");
}

ControlAction clamp_action(ControlAction action) {
  std::visit(
      [](auto& a) {
        using A = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<A, ThrustVectorAction>) {
          a.thrust = unit_clamp(a.thrust);
          a.roll = unit_clamp(a.roll);
          a.pitch = unit_clamp(a.pitch);
        } else {
          for (double& v : a.rotor) v = unit_clamp(v);
        }
      },
      action);
  return action;
}

AttitudeSetpoint decode_thrust_vector_action(const ThrustVectorAction& action, double current_yaw) {
  AttitudeSetpoint sp;
  sp.thrust_fraction = (unit_clamp(action.thrust) + 1.0) / 2.0;
  sp.roll = unit_clamp(action.roll);
  sp.pitch = unit_clamp(action.pitch);
  sp.yaw = current_yaw;
  return sp;
}

sim::MotorCommand decode_rpm_action(const RpmAction& action, const sim::QuadParams& params,
                                    double scale) {
  const double hover = sim::hover_rpm(params);
  sim::MotorCommand cmd;
  for (std::size_t i = 0; i < 4; ++i) cmd.rpm[i] = hover * (1.0 + scale * unit_clamp(action.rotor[i]));
  return sim::clamp(cmd, params);
}

double max_total_thrust(const sim::QuadParams& params) {
  return 4.0 * params.thrust_coeff * params.rpm_max * params.rpm_max;
}

MixResult mix_to_rpms(double thrust, const Eigen::Vector3d& torque, const sim::QuadParams& params) {
  const double kf = params.thrust_coeff;
  const double km = params.torque_coeff;
  const double l = params.moment_arm();
  // Rows of rotor_forces acting on rpm^2.
  Eigen::Matrix4d allocation;
  allocation << kf, kf, kf, kf,
                -l * kf, l * kf, l * kf, -l * kf,
                -l * kf, l * kf, -l * kf, l * kf,
                -km, -km, km, km;
  const Eigen::Vector4d wrench(thrust, torque.x(), torque.y(), torque.z());
  const Eigen::Vector4d squared = allocation.inverse() * wrench;

  MixResult out;
  const double max_sq = params.rpm_max * params.rpm_max;
  for (int i = 0; i < 4; ++i) {
    if (squared[i] < 0.0 || squared[i] > max_sq) out.feasible = false;
    out.command.rpm[i] = std::sqrt(std::max(squared[i], 0.0));
  }
  out.command = sim::clamp(out.command, params);
  return out;
}

PidOutput attitude_pid_step(const sim::QuadState& state, const AttitudeSetpoint& sp,
                            const PidGains& gains, const PidState& pid, double dt,
                            const sim::QuadParams& params) {
  const Eigen::Vector3d euler = sim::euler_angles(state);
  const Eigen::Vector3d error(sp.roll - euler.x(), sp.pitch - euler.y(),
                              sim::wrap_angle(sp.yaw - euler.z()));
  const AxisGains* axes[3] = {&gains.roll, &gains.pitch, &gains.yaw};

  PidOutput out;
  out.state = pid;
  for (int i = 0; i < 3; ++i) {
    const AxisGains& g = *axes[i];
    const double limit = g.integral_limit;
    out.state.integral[i] = std::clamp(pid.integral[i] + error[i] * dt, -limit, limit);
    out.torque[i] = g.kp * error[i] + g.ki * out.state.integral[i] -
                    g.kd * state.angular_velocity[i];
  }

  const double thrust = std::clamp(sp.thrust_fraction, 0.0, 1.0) * max_total_thrust(params);
  const MixResult mix = mix_to_rpms(thrust, out.torque, params);
  out.command = mix.command;
  out.saturated = !mix.feasible;
  return out;
}

}  // namespace quadrl::control
