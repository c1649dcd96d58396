#include "quadrl/dynamics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Geometry>

#include "quadrl/errors.hpp"

namespace quadrl {

double QuadrotorParams::hover_rpm() const {
  return std::sqrt(gravity * mass / (4.0 * thrust_coefficient));
}

void QuadrotorParams::validate() const {
  if (!(mass > 0.0)) throw ConfigError("quadrotor: mass must be > 0");
  if (!(arm_length > 0.0)) throw ConfigError("quadrotor: arm_length must be > 0");
  if (!(thrust_coefficient > 0.0)) {
    throw ConfigError("quadrotor: thrust_coefficient must be > 0");
  }
  if (!(moment_coefficient > 0.0)) {
    throw ConfigError("quadrotor: moment_coefficient must be > 0");
  }
  if (!(propeller_radius > 0.0)) {
    throw ConfigError("quadrotor: propeller_radius must be > 0");
  }
  if (!(inertia_diag.minCoeff() > 0.0)) {
    throw ConfigError("quadrotor: inertia entries must be > 0");
  }
  if (drag_diag.minCoeff() < 0.0) {
    throw ConfigError("quadrotor: drag entries must be >= 0");
  }
  if (!(max_rpm > 0.0)) throw ConfigError("quadrotor: max_rpm must be > 0");
}

bool QuadrotorState::is_finite() const {
  return position.allFinite() && velocity.allFinite() && body_rates.allFinite() &&
         std::isfinite(attitude.x) && std::isfinite(attitude.y) &&
         std::isfinite(attitude.z) && std::isfinite(attitude.w);
}

BodyWrench motor_forces(const MotorCommand& cmd, const QuadrotorParams& params) {
  for (double rpm : cmd.rpm) {
    if (!(rpm >= 0.0 && rpm <= params.max_rpm)) {
      throw std::invalid_argument("motor_forces: rpm outside [0, max_rpm]");
    }
  }
  std::array<double, 4> f;
  for (int i = 0; i < 4; ++i) {
    f[i] = params.thrust_coefficient * cmd.rpm[i] * cmd.rpm[i];
  }
  const double arm = params.arm_length / std::sqrt(2.0);
  const double km = params.moment_coefficient;
  BodyWrench out;
  out.thrust = {0.0, 0.0, f[0] + f[1] + f[2] + f[3]};
  out.torque = {
      arm * (f[0] + f[1] - f[2] - f[3]),
      arm * (-f[0] + f[1] + f[2] - f[3]),
      km * (-cmd.rpm[0] * cmd.rpm[0] + cmd.rpm[1] * cmd.rpm[1] -
            cmd.rpm[2] * cmd.rpm[2] + cmd.rpm[3] * cmd.rpm[3]),
  };
  return out;
}

MotorCommand hover_command(const QuadrotorParams& params) {
  const double r = params.hover_rpm();
  return MotorCommand{{r, r, r, r}};
}

StateDerivative state_derivative(const QuadrotorState& state, const BodyWrench& wrench,
                                 const QuadrotorParams& params) {
  StateDerivative d;
  d.velocity = state.velocity;

  // Thrust is rotated through a normalized copy so intermediate RK4 stages
  // with slightly off-unit quaternions stay physically consistent.
  const Quat qn = quat_normalized(state.attitude);
  const Eigen::Vector3d thrust_inertial = rotation_matrix(qn) * wrench.thrust;
  d.acceleration = thrust_inertial / params.mass;
  d.acceleration.z() -= params.gravity;
  d.acceleration -= params.drag_diag.cwiseProduct(state.velocity) / params.mass;

  const Quat& q = state.attitude;
  const Quat omega{state.body_rates.x(), state.body_rates.y(), state.body_rates.z(), 0.0};
  const Quat qdot = quat_multiply(q, omega);
  d.attitude_rate = 0.5 * Eigen::Vector4d{qdot.x, qdot.y, qdot.z, qdot.w};

  const Eigen::Vector3d& w = state.body_rates;
  const Eigen::Vector3d iw = params.inertia_diag.cwiseProduct(w);
  d.angular_acceleration =
      (wrench.torque - w.cross(iw)).cwiseQuotient(params.inertia_diag);
  return d;
}

namespace {

QuadrotorState advance(const QuadrotorState& s, const StateDerivative& d, double h) {
  QuadrotorState out;
  out.position = s.position + h * d.velocity;
  out.attitude = {s.attitude.x + h * d.attitude_rate.x(),
                  s.attitude.y + h * d.attitude_rate.y(),
                  s.attitude.z + h * d.attitude_rate.z(),
                  s.attitude.w + h * d.attitude_rate.w()};
  out.velocity = s.velocity + h * d.acceleration;
  out.body_rates = s.body_rates + h * d.angular_acceleration;
  return out;
}

}  // namespace

QuadrotorState step(const QuadrotorState& state, const MotorCommand& cmd,
                    const QuadrotorParams& params, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
  const BodyWrench wrench = motor_forces(cmd, params);

  const StateDerivative k1 = state_derivative(state, wrench, params);
  const StateDerivative k2 = state_derivative(advance(state, k1, dt / 2.0), wrench, params);
  const StateDerivative k3 = state_derivative(advance(state, k2, dt / 2.0), wrench, params);
  const StateDerivative k4 = state_derivative(advance(state, k3, dt), wrench, params);

  const double h6 = dt / 6.0;
  QuadrotorState out;
  out.position = state.position +
                 h6 * (k1.velocity + 2.0 * k2.velocity + 2.0 * k3.velocity + k4.velocity);
  const Eigen::Vector4d dq = h6 * (k1.attitude_rate + 2.0 * k2.attitude_rate +
                                   2.0 * k3.attitude_rate + k4.attitude_rate);
  out.attitude = {state.attitude.x + dq.x(), state.attitude.y + dq.y(),
                  state.attitude.z + dq.z(), state.attitude.w + dq.w()};
  out.velocity = state.velocity + h6 * (k1.acceleration + 2.0 * k2.acceleration +
                                        2.0 * k3.acceleration + k4.acceleration);
  out.body_rates =
      state.body_rates + h6 * (k1.angular_acceleration + 2.0 * k2.angular_acceleration +
                               2.0 * k3.angular_acceleration + k4.angular_acceleration);

  if (!out.is_finite()) {
    std::ostringstream msg;
    msg << "step: non-finite state after dt=" << dt << " from position ("
        << state.position.transpose() << ")";
    throw DivergenceError(msg.str());
  }
  out.attitude = quat_normalized(out.attitude);
  return out;
}

}  // namespace quadrl
