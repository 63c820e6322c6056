#pragma once

// Shared 3D geometry: rotations, poses, rays and the pinhole camera.
//
// Units: world coordinates are millimeters, image coordinates are pixels,
// angles are radians. Camera frame: x right, y down, z along the optical axis.

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <string>

namespace eep {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using RotMat = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Intrinsic X-Y-Z angles; the rotation is Rot(z,gamma) * Rot(y,beta) * Rot(x,alpha).
struct EulerAngles {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

struct EulerDecomposition {
  EulerAngles angles;
  /// |R(2,0)| within 1e-12 of one: alpha and gamma are not separable.
  bool gimbal_lock = false;
};

struct Pose {
  Vec3 position = Vec3::Zero();
  RotMat orientation = RotMat::Identity();

  /// Maps a point expressed in this frame into the parent (world) frame.
  [[nodiscard]] Vec3 to_world(const Vec3& local) const { return orientation * local + position; }
  [[nodiscard]] Vec3 to_local(const Vec3& world) const {
    return orientation.transpose() * (world - position);
  }
};

/// A half-line; the direction is kept at unit norm.
class Ray {
 public:
  Ray(const Vec3& origin, const Vec3& direction);

  [[nodiscard]] const Vec3& origin() const { return origin_; }
  [[nodiscard]] const Vec3& direction() const { return direction_; }
  [[nodiscard]] Vec3 at(double t) const { return origin_ + t * direction_; }
  /// Distance from a point to the infinite line carrying this ray.
  [[nodiscard]] double distance_to(const Vec3& p) const;

 private:
  Vec3 origin_;
  Vec3 direction_;
};

struct ImageSize {
  int width = 640;
  int height = 480;
};

struct Intrinsics {
  double focal_px = 500.0;
  Vec2 principal_point{320.0, 240.0};
  ImageSize image_size{};

  void validate() const;
};

/// Zero-skew, distortion-free pinhole camera placed in the world by `pose`.
struct CameraModel {
  Pose pose;
  Intrinsics intrinsics;

  /// Throws GeometryError for points at or behind the camera plane.
  [[nodiscard]] Vec2 project(const Vec3& p_w) const;
  /// Depth along the optical axis (positive in front of the camera).
  [[nodiscard]] double depth(const Vec3& p_w) const;
  [[nodiscard]] Ray backproject(const Vec2& pixel) const;
  /// Unnormalized world-frame direction R_c^w [u - cx, v - cy, f].
  [[nodiscard]] Vec3 image_to_camera_vector(const Vec2& pixel) const;
};

RotMat rot_x(double angle);
RotMat rot_y(double angle);
RotMat rot_z(double angle);

RotMat euler_to_rotmat(const EulerAngles& e);
EulerDecomposition rotmat_to_euler(const RotMat& r);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

/// Largest |R^T R - I| entry and |det R - 1|, for invariant checks.
double orthonormality_error(const RotMat& r);

/// 6-vector (x, y, z, alpha, beta, gamma) <-> Pose.
Vec6 pose_to_vector(const Pose& p);
Pose vector_to_pose(const Vec6& v);

/// Rotation angle of Ra^T Rb.
double rotation_distance(const RotMat& a, const RotMat& b);

/// Camera at `eye` looking at `target`; image y axis points toward -up.
Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& up = Vec3::UnitZ());

}  // namespace eep
