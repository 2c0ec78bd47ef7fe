#pragma once

#include <array>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace quadrl::sim {

/// Vehicle constants. Defaults describe a Crazyflie 2.x class airframe.
struct QuadParams {
  double mass = 0.027;                                        // kg
  Eigen::Vector3d inertia{1.4e-5, 1.4e-5, 2.17e-5};           // kg m^2, body diagonal
  double arm_length = 0.0397;                                 // m, hub to rotor
  double thrust_coeff = 3.16e-10;                             // N / RPM^2
  double torque_coeff = 7.94e-12;                             // N m / RPM^2
  double rpm_min = 0.0;
  double rpm_max = 21700.0;
  double gravity = 9.81;                                      // m/s^2
  double physics_dt = 1.0 / 200.0;                            // s
  double motor_time_constant = 0.0;                           // s, 0 = instantaneous

  /// Throws ConfigError when a field is out of range or physics_dt does not
  /// evenly divide `agent_period`.
  void validate(double agent_period) const;

  /// Moment arm of each rotor about the roll and pitch axes (X layout).
  double moment_arm() const;
};

double hover_rpm(const QuadParams& params);

/// Rotor speeds, ordered front-right, back-left, front-left, back-right.
/// Front-right and back-left spin counter-clockwise seen from above.
struct MotorCommand {
  std::array<double, 4> rpm{};
};

MotorCommand clamp(MotorCommand cmd, const QuadParams& params);

struct QuadState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();          // world, z up
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();          // world
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();  // world <- body
  Eigen::Vector3d angular_velocity = Eigen::Vector3d::Zero();  // body
  std::array<double, 4> rotor_rpm{};  // only meaningful with a motor time constant

  bool finite() const;
};

struct RotorForces {
  double thrust = 0.0;                               // N along body z
  Eigen::Vector3d torque = Eigen::Vector3d::Zero();  // N m, body frame
};

RotorForces rotor_forces(const MotorCommand& cmd, const QuadParams& params);

/// Advances one physics_dt. Throws NonFiniteState on blow-up.
QuadState step_dynamics(const QuadState& state, const MotorCommand& cmd,
                        const QuadParams& params);

/// Z-Y-X (yaw, pitch, roll) angles (phi, theta, psi). phi, psi in (-pi, pi],
/// theta in [-pi/2, pi/2]. At gimbal lock phi is 0 and psi absorbs the rest.
Eigen::Vector3d euler_angles(const Eigen::Quaterniond& q);
inline Eigen::Vector3d euler_angles(const QuadState& s) { return euler_angles(s.orientation); }

Eigen::Quaterniond quaternion_from_euler(double roll, double pitch, double yaw);

/// Wraps into (-pi, pi].
double wrap_angle(double a);

}  // namespace quadrl::sim
