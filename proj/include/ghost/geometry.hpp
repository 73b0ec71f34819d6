#pragma once

#include <cmath>
#include <numbers>
#include <optional>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "ghost/camera.hpp"
#include "ghost/error.hpp"

namespace ghost {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Hamilton-convention quaternion, scalar first.
struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
  bool operator==(const Quaternion&) const = default;
};

// World-to-camera rigid transform: p_c = R(q) p_w + t.
struct RigidPose {
  Quaternion q;
  Vec3 t = Vec3::Zero();

  bool operator==(const RigidPose& o) const { return q == o.q && t == o.t; }
};

struct PixelPoint {
  double u = 0.0;
  double v = 0.0;
};

class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  // Renormalizes q. Throws Error on a zero or non-finite quaternion.
  explicit Rotation(const Quaternion& q) {
    const double n = q.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw Error("rotation from a zero-norm or non-finite quaternion");
    }
    const double w = q.w / n, x = q.x / n, y = q.y / n, z = q.z / n;
    m_ << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
        2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
        2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  }

  const Mat3& matrix() const { return m_; }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

 private:
  Mat3 m_;
};

inline Rotation quat_to_rotation(const Quaternion& q) { return Rotation(q); }

// Inverse of quat_to_rotation for proper rotation matrices (Shepperd's
// method). The returned quaternion has w >= 0.
inline Quaternion rotation_to_quat(const Mat3& r) {
  Quaternion q;
  const double trace = r.trace();
  if (trace > 0.0) {
    const double s = 0.5 / std::sqrt(trace + 1.0);
    q.w = 0.25 / s;
    q.x = (r(2, 1) - r(1, 2)) * s;
    q.y = (r(0, 2) - r(2, 0)) * s;
    q.z = (r(1, 0) - r(0, 1)) * s;
  } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2));
    q.w = (r(2, 1) - r(1, 2)) / s;
    q.x = 0.25 * s;
    q.y = (r(0, 1) + r(1, 0)) / s;
    q.z = (r(0, 2) + r(2, 0)) / s;
  } else if (r(1, 1) > r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2));
    q.w = (r(0, 2) - r(2, 0)) / s;
    q.x = (r(0, 1) + r(1, 0)) / s;
    q.y = 0.25 * s;
    q.z = (r(1, 2) + r(2, 1)) / s;
  } else {
    const double s = 2.0 * std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1));
    q.w = (r(1, 0) - r(0, 1)) / s;
    q.x = (r(0, 2) + r(2, 0)) / s;
    q.y = (r(1, 2) + r(2, 1)) / s;
    q.z = 0.25 * s;
  }
  if (q.w < 0.0) q = {-q.w, -q.x, -q.y, -q.z};
  const double n = q.norm();
  return {q.w / n, q.x / n, q.y / n, q.z / n};
}

// Precomputed world-to-camera transform for hot loops.
class CameraTransform {
 public:
  explicit CameraTransform(const RigidPose& pose)
      : r_(Rotation(pose.q).matrix()), t_(pose.t) {}

  Vec3 to_camera(const Vec3& p_w) const { return r_ * p_w + t_; }
  // c_w = -R^T t
  Vec3 center() const { return -(r_.transpose() * t_); }
  // Camera +y (down) and -y (up) axes expressed in the world frame.
  Vec3 down_axis() const { return r_.row(1).transpose(); }
  Vec3 up_axis() const { return -down_axis(); }
  const Mat3& rotation() const { return r_; }

 private:
  Mat3 r_;
  Vec3 t_;
};

inline Vec3 world_to_camera(const RigidPose& pose, const Vec3& p_w) {
  return CameraTransform(pose).to_camera(p_w);
}

inline Vec3 camera_center(const RigidPose& pose) {
  return CameraTransform(pose).center();
}

inline Vec3 camera_down_axis(const RigidPose& pose) {
  return CameraTransform(pose).down_axis();
}

inline constexpr double kDefaultMaxFieldAngleDeg = 89.0;

// COLMAP SIMPLE_RADIAL_FISHEYE forward model. theta is the angle between p_c
// and the optical axis; theta_d = theta (1 + k theta^2); the image point is
// (cx, cy) + f theta_d (x, y) / |(x, y)|. Returns nullopt for points behind
// the camera or beyond the field-angle cutoff. Throws for other models.
inline std::optional<PixelPoint> project_fisheye(
    const CameraIntrinsics& cam, const Vec3& p_c,
    double max_field_angle_deg = kDefaultMaxFieldAngleDeg) {
  if (cam.model != CameraModel::kSimpleRadialFisheye) {
    throw Error("project_fisheye: camera " + std::to_string(cam.camera_id) +
                " is " + cam.name() + ", expected SIMPLE_RADIAL_FISHEYE");
  }
  if (!(p_c.z() > 0.0)) return std::nullopt;
  const double rho = std::hypot(p_c.x(), p_c.y());
  const double theta = std::atan2(rho, p_c.z());
  if (theta > max_field_angle_deg * std::numbers::pi / 180.0) {
    return std::nullopt;
  }
  const double f = cam.params[0];
  const double cx = cam.params[1];
  const double cy = cam.params[2];
  const double k = cam.params[3];
  if (rho == 0.0) return PixelPoint{cx, cy};
  const double theta_d = theta * (1.0 + k * theta * theta);
  const double scale = f * theta_d / rho;
  return PixelPoint{cx + scale * p_c.x(), cy + scale * p_c.y()};
}

}  // namespace ghost
