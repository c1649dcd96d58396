#pragma once

#include <Eigen/Core>

namespace quadrl {

// Unit-quaternion utilities shared by the simulator, the environment and the
// evaluation metrics. Components are stored in (x, y, z, w) order everywhere;
// the product follows the Hamilton (right-handed) convention, so body angular
// velocity composes on the right: q_dot = 0.5 * q ⊗ (omega, 0).
struct Quat {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double w = 1.0;

  static Quat identity() { return {0.0, 0.0, 0.0, 1.0}; }

  Eigen::Vector3d vec() const { return {x, y, z}; }
  Eigen::Vector4d coeffs() const { return {x, y, z, w}; }
};

double quat_norm(const Quat& q);
Quat quat_normalized(const Quat& q);

// Hamilton product a ⊗ b. Inputs need not be unit.
Quat quat_multiply(const Quat& a, const Quat& b);

Quat quat_conjugate(const Quat& q);

// Rotates v by the sandwich product Im(q ⊗ (v, 0) ⊗ q*).
// Requires |q| = 1 within 1e-6; throws std::invalid_argument otherwise.
Eigen::Vector3d rotate_vector(const Quat& q, const Eigen::Vector3d& v);

// Error quaternion q_target* ⊗ q_current, normalized, with w >= 0 enforced by
// sign flip (shortest-path convention). A w == 0 tie is broken toward a
// positive z, then y, then x component.
Quat error_quaternion(const Quat& q_current, const Quat& q_target);

// Shortest angular distance encoded by an error quaternion:
// theta = 2 * atan2(|v|, |w|) in [0, pi]. Taking |w| makes the result
// invariant under q_e -> -q_e.
double geodesic_angle(const Quat& q_e);

// Intrinsic ZYX (yaw-pitch-roll) angles, returned as (roll, pitch, yaw).
// Near |pitch| = pi/2 the decomposition is degenerate and the returned
// roll/yaw split is best-effort.
Eigen::Vector3d euler_from_quaternion(const Quat& q);

// Inverse of euler_from_quaternion: q = q_yaw ⊗ q_pitch ⊗ q_roll.
Quat quat_from_euler(double roll, double pitch, double yaw);

// axis need not be normalized; angle in radians.
Quat quat_from_axis_angle(const Eigen::Vector3d& axis, double angle);

// Rotation matrix R(q) such that rotate_vector(q, v) == R(q) * v for unit q.
Eigen::Matrix3d rotation_matrix(const Quat& q);

}  // namespace quadrl
