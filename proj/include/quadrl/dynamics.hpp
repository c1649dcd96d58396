#pragma once

#include <array>

#include <Eigen/Core>

#include "quadrl/quat.hpp"

namespace quadrl {

// Crazyflie-class quadrotor in x configuration.
//
// Motor layout (body frame: x forward, y left, z up; per-axis moment arm is
// arm_length / sqrt(2)):
//
//   motor | position (x, y) | spin | yaw reaction
//   ------+-----------------+------+-------------
//     0   |   ( +, + ) front-left  | CCW  |  -z
//     1   |   ( -, + ) back-left   | CW   |  +z
//     2   |   ( -, - ) back-right  | CCW  |  -z
//     3   |   ( +, - ) front-right | CW   |  +z
struct QuadrotorParams {
  double mass = 0.033;                   // kg
  double arm_length = 39.73e-3;          // m, center to motor
  double thrust_coefficient = 3.16e-10;  // N per RPM^2
  double moment_coefficient = 7.49e-12;  // N*m per RPM^2
  double propeller_radius = 23.1348e-3;  // m
  Eigen::Vector3d inertia_diag{1.395e-5, 1.436e-5, 2.173e-5};  // kg*m^2
  Eigen::Vector3d drag_diag{0.0, 0.0, 0.0};                    // N*s/m
  double gravity = 9.81;   // m/s^2
  double max_rpm = 24000;  // RPM

  // Table values for the Crazyflie 2.1 (the defaults above).
  static QuadrotorParams crazyflie21() { return {}; }

  // Per-motor speed at which total thrust balances gravity:
  // sqrt(g*m / (4*k_f)).
  double hover_rpm() const;

  // Throws ConfigError when a physical bound is violated.
  void validate() const;
};

struct QuadrotorState {
  Eigen::Vector3d position{0.0, 0.0, 0.0};   // m, inertial frame
  Quat attitude = Quat::identity();          // body-to-inertial
  Eigen::Vector3d velocity{0.0, 0.0, 0.0};   // m/s, inertial frame
  Eigen::Vector3d body_rates{0.0, 0.0, 0.0};  // rad/s, body frame

  bool is_finite() const;
};

struct MotorCommand {
  std::array<double, 4> rpm{0.0, 0.0, 0.0, 0.0};
};

// Total thrust and torque in the body frame.
struct BodyWrench {
  Eigen::Vector3d thrust{0.0, 0.0, 0.0};  // N, along body axes
  Eigen::Vector3d torque{0.0, 0.0, 0.0};  // N*m, about body axes
};

struct StateDerivative {
  Eigen::Vector3d velocity;              // d/dt position
  Eigen::Vector4d attitude_rate;         // d/dt quaternion, (x, y, z, w)
  Eigen::Vector3d acceleration;          // d/dt velocity
  Eigen::Vector3d angular_acceleration;  // d/dt body rates
};

// Thrust/torque allocation for the x configuration above.
// Throws std::invalid_argument when any rpm is outside [0, max_rpm].
BodyWrench motor_forces(const MotorCommand& cmd, const QuadrotorParams& params);

MotorCommand hover_command(const QuadrotorParams& params);

// Rigid-body equations of motion:
//   accel   = rotate(q, T_B) / m - g*z_hat - D*v / m
//   q_dot   = 0.5 * q ⊗ (omega_B, 0)
//   w_dot_B = I^-1 * (tau_B - omega_B x I*omega_B)
StateDerivative state_derivative(const QuadrotorState& state, const BodyWrench& wrench,
                                 const QuadrotorParams& params);

// One explicit RK4 step with the motor command held constant, followed by
// quaternion renormalization. Throws DivergenceError on a non-finite result.
QuadrotorState step(const QuadrotorState& state, const MotorCommand& cmd,
                    const QuadrotorParams& params, double dt);

}  // namespace quadrl
