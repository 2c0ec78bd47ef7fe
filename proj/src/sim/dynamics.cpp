#include "quadrl/sim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "quadrl/common/errors.hpp"

namespace quadrl::sim {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("quad: " + what);
}

}  // namespace

void QuadParams::validate(double agent_period) const {
  require(mass > 0.0, "mass must be > 0");
  require((inertia.array() > 0.0).all(), "inertia must be > 0");
  require(arm_length > 0.0, "arm_length must be > 0");
  require(thrust_coeff > 0.0, "thrust_coeff must be > 0");
  require(torque_coeff > 0.0, "torque_coeff must be > 0");
  require(rpm_min >= 0.0, "rpm_min must be >= 0");
  require(rpm_min < rpm_max, "rpm_min must be < rpm_max");
  require(gravity > 0.0, "gravity must be > 0");
  require(mass * gravity < 4.0 * thrust_coeff * rpm_max * rpm_max,
          "rpm_max cannot lift the vehicle");
  require(physics_dt > 0.0, "physics_dt must be > 0");
  require(motor_time_constant >= 0.0, "motor_time_constant must be >= 0");
  const double ratio = agent_period / physics_dt;
  require(ratio >= 1.0 - 1e-9 && std::abs(ratio - std::round(ratio)) < 1e-9,
          "physics_dt must evenly divide the agent period");
}

double QuadParams::moment_arm() const { return arm_length / std::numbers::sqrt2; }

double hover_rpm(const QuadParams& p) {
  return std::sqrt(p.mass * p.gravity / (4.0 * p.thrust_coeff));
}

MotorCommand clamp(MotorCommand cmd, const QuadParams& p) {
  for (double& w : cmd.rpm) w = std::clamp(w, p.rpm_min, p.rpm_max);
  return cmd;
}

bool QuadState::finite() const {
  return position.allFinite() && velocity.allFinite() && orientation.coeffs().allFinite() &&
         angular_velocity.allFinite();
}

RotorForces rotor_forces(const MotorCommand& cmd, const QuadParams& p) {
  const auto& w = cmd.rpm;
  const double s0 = w[0] * w[0], s1 = w[1] * w[1], s2 = w[2] * w[2], s3 = w[3] * w[3];
  const double f0 = p.thrust_coeff * s0, f1 = p.thrust_coeff * s1;
  const double f2 = p.thrust_coeff * s2, f3 = p.thrust_coeff * s3;
  const double arm = p.moment_arm();
  // Rotor positions (x forward, y left): FR (+,-), BL (-,+), FL (+,+), BR (-,-).
  RotorForces out;
  out.thrust = f0 + f1 + f2 + f3;
  out.torque.x() = arm * (-f0 + f1 + f2 - f3);
  out.torque.y() = arm * (-f0 + f1 - f2 + f3);
  out.torque.z() = p.torque_coeff * (-s0 - s1 + s2 + s3);
  return out;
}

QuadState step_dynamics(const QuadState& state, const MotorCommand& cmd, const QuadParams& p) {
  const double dt = p.physics_dt;
  QuadState next = state;

  MotorCommand applied = clamp(cmd, p);
  if (p.motor_time_constant > 0.0) {
    const double blend = 1.0 - std::exp(-dt / p.motor_time_constant);
    for (std::size_t i = 0; i < 4; ++i)
      next.rotor_rpm[i] = state.rotor_rpm[i] + blend * (applied.rpm[i] - state.rotor_rpm[i]);
    applied.rpm = next.rotor_rpm;
  } else {
    next.rotor_rpm = applied.rpm;
  }

  const RotorForces f = rotor_forces(applied, p);

  // Translation: constant acceleration over the step.
  const Eigen::Vector3d thrust_world = state.orientation * Eigen::Vector3d(0.0, 0.0, f.thrust);
  const Eigen::Vector3d accel = thrust_world / p.mass - Eigen::Vector3d(0.0, 0.0, p.gravity);
  next.position = state.position + state.velocity * dt + 0.5 * accel * dt * dt;
  next.velocity = state.velocity + accel * dt;

  // Rotation: body rates first, then attitude with the updated rates.
  const Eigen::Vector3d& w = state.angular_velocity;
  const Eigen::Vector3d gyro = w.cross(p.inertia.cwiseProduct(w));
  const Eigen::Vector3d alpha = (f.torque - gyro).cwiseQuotient(p.inertia);
  next.angular_velocity = w + alpha * dt;

  const double angle = next.angular_velocity.norm() * dt;
  if (angle > 0.0) {
    const Eigen::Quaterniond delta(
        Eigen::AngleAxisd(angle, next.angular_velocity / next.angular_velocity.norm()));
    next.orientation = state.orientation * delta;
  }
  next.orientation.normalize();

  if (!next.finite()) throw NonFiniteState("non-finite quadrotor state after integration");
  return next;
}

Eigen::Vector3d euler_angles(const Eigen::Quaterniond& q) {
  const Eigen::Matrix3d r = q.toRotationMatrix();
  const double sin_pitch = std::clamp(-r(2, 0), -1.0, 1.0);
  double roll = 0.0, pitch = 0.0, yaw = 0.0;
  if (std::abs(sin_pitch) >= 1.0 - 1e-12) {
    pitch = std::copysign(std::numbers::pi / 2.0, sin_pitch);
    yaw = std::atan2(-r(0, 1), r(1, 1));
  } else {
    pitch = std::asin(sin_pitch);
    roll = std::atan2(r(2, 1), r(2, 2));
    yaw = std::atan2(r(1, 0), r(0, 0));
  }
  return {wrap_angle(roll), pitch, wrap_angle(yaw)};
}

Eigen::Quaterniond quaternion_from_euler(double roll, double pitch, double yaw) {
  return Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) *
                            Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
                            Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()));
}

double wrap_angle(double a) {
  constexpr double pi = std::numbers::pi;
  if (a > -pi && a <= pi) return a;
  a = std::remainder(a, 2.0 * pi);
  return a <= -pi ? a + 2.0 * pi : a;
}

}  // namespace quadrl::sim
