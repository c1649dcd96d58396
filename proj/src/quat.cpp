#include "quadrl/quat.hpp"

#include <cmath>
#include <stdexcept>

namespace quadrl {

namespace {
constexpr double kUnitTolerance = 1e-6;

void require_unit(const Quat& q, const char* who) {
  if (std::abs(quat_norm(q) - 1.0) > kUnitTolerance) {
    throw std::invalid_argument(std::string(who) + ": quaternion is not unit length");
  }
}
}  // namespace

double quat_norm(const Quat& q) {
  return std::sqrt(q.x * q.x + q.y * q.y + q.z * q.z + q.w * q.w);
}

Quat quat_normalized(const Quat& q) {
  const double n = quat_norm(q);
  if (n == 0.0) {
    throw std::invalid_argument("quat_normalized: zero quaternion");
  }
  return {q.x / n, q.y / n, q.z / n, q.w / n};
}

Quat quat_multiply(const Quat& a, const Quat& b) {
  return {
      a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
      a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
      a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
      a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
  };
}

Quat quat_conjugate(const Quat& q) { return {-q.x, -q.y, -q.z, q.w}; }

Eigen::Vector3d rotate_vector(const Quat& q, const Eigen::Vector3d& v) {
  require_unit(q, "rotate_vector");
  const Quat pure{v.x(), v.y(), v.z(), 0.0};
  const Quat r = quat_multiply(quat_multiply(q, pure), quat_conjugate(q));
  return {r.x, r.y, r.z};
}

Quat error_quaternion(const Quat& q_current, const Quat& q_target) {
  require_unit(q_current, "error_quaternion");
  require_unit(q_target, "error_quaternion");
  Quat e = quat_normalized(quat_multiply(quat_conjugate(q_target), q_current));
  bool flip = e.w < 0.0;
  if (e.w == 0.0) {
    if (e.z != 0.0) {
      flip = e.z < 0.0;
    } else if (e.y != 0.0) {
      flip = e.y < 0.0;
    } else {
      flip = e.x < 0.0;
    }
  }
  if (flip) {
    e = {-e.x, -e.y, -e.z, -e.w};
  }
  return e;
}

double geodesic_angle(const Quat& q_e) {
  const double v = q_e.vec().norm();
  return 2.0 * std::atan2(v, std::abs(q_e.w));
}

Eigen::Vector3d euler_from_quaternion(const Quat& q) {
  const double roll =
      std::atan2(2.0 * (q.w * q.x + q.y * q.z), 1.0 - 2.0 * (q.x * q.x + q.y * q.y));
  double sp = 2.0 * (q.w * q.y - q.z * q.x);
  sp = std::clamp(sp, -1.0, 1.0);
  const double pitch = std::asin(sp);
  const double yaw =
      std::atan2(2.0 * (q.w * q.z + q.x * q.y), 1.0 - 2.0 * (q.y * q.y + q.z * q.z));
  return {roll, pitch, yaw};
}

Quat quat_from_euler(double roll, double pitch, double yaw) {
  const Quat qz{0.0, 0.0, std::sin(yaw / 2.0), std::cos(yaw / 2.0)};
  const Quat qy{0.0, std::sin(pitch / 2.0), 0.0, std::cos(pitch / 2.0)};
  const Quat qx{std::sin(roll / 2.0), 0.0, 0.0, std::cos(roll / 2.0)};
  return quat_multiply(quat_multiply(qz, qy), qx);
}

Quat quat_from_axis_angle(const Eigen::Vector3d& axis, double angle) {
  const double n = axis.norm();
  if (n == 0.0) {
    throw std::invalid_argument("quat_from_axis_angle: zero axis");
  }
  const Eigen::Vector3d u = axis / n;
  const double s = std::sin(angle / 2.0);
  return {u.x() * s, u.y() * s, u.z() * s, std::cos(angle / 2.0)};
}

Eigen::Matrix3d rotation_matrix(const Quat& q) {
  const double x = q.x, y = q.y, z = q.z, w = q.w;
  Eigen::Matrix3d r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w),
      2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w),
      2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y);
  return r;
}

}  // namespace quadrl
