#include "eep/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace eep {

Ray::Ray(const Vec3& origin, const Vec3& direction) : origin_(origin) {
  const double n = direction.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw GeometryError("ray direction must be finite and non-zero");
  direction_ = direction / n;
}

double Ray::distance_to(const Vec3& p) const {
  return (p - origin_).cross(direction_).norm();
}

void Intrinsics::validate() const {
  if (!(focal_px > 0.0)) throw GeometryError("focal length must be positive");
  if (image_size.width < 1 || image_size.height < 1) throw GeometryError("image size must be positive");
  if (principal_point.x() < 0.0 || principal_point.x() > image_size.width ||
      principal_point.y() < 0.0 || principal_point.y() > image_size.height) {
    throw GeometryError("principal point outside image bounds");
  }
}

double CameraModel::depth(const Vec3& p_w) const {
  return pose.to_local(p_w).z();
}

Vec2 CameraModel::project(const Vec3& p_w) const {
  const Vec3 pc = pose.to_local(p_w);
  if (!(pc.z() > 0.0)) throw GeometryError("point at or behind the camera plane");
  return {intrinsics.focal_px * pc.x() / pc.z() + intrinsics.principal_point.x(),
          intrinsics.focal_px * pc.y() / pc.z() + intrinsics.principal_point.y()};
}

Vec3 CameraModel::image_to_camera_vector(const Vec2& pixel) const {
  const Vec3 local{pixel.x() - intrinsics.principal_point.x(), pixel.y() - intrinsics.principal_point.y(),
                   intrinsics.focal_px};
  return pose.orientation * local;
}

Ray CameraModel::backproject(const Vec2& pixel) const {
  return {pose.position, image_to_camera_vector(pixel)};
}

RotMat rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  RotMat r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

RotMat rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  RotMat r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

RotMat rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  RotMat r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

RotMat euler_to_rotmat(const EulerAngles& e) {
  return rot_z(e.gamma) * rot_y(e.beta) * rot_x(e.alpha);
}

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::remainder(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  return a;
}

EulerDecomposition rotmat_to_euler(const RotMat& r) {
  // R(2,0) = -sin(beta), R(2,1) = cos(beta) sin(alpha), R(2,2) = cos(beta) cos(alpha),
  // R(1,0) = sin(gamma) cos(beta), R(0,0) = cos(gamma) cos(beta).
  EulerDecomposition out;
  const double s = std::clamp(-r(2, 0), -1.0, 1.0);
  if (std::abs(r(2, 0)) > 1.0 - 1e-12) {
    out.gimbal_lock = true;
    out.angles.beta = s > 0 ? std::numbers::pi / 2 : -std::numbers::pi / 2;
    // Only alpha -/+ gamma is observable; put everything in alpha.
    out.angles.gamma = 0.0;
    out.angles.alpha = s > 0 ? std::atan2(r(0, 1), r(1, 1)) : std::atan2(-r(0, 1), r(1, 1));
  } else {
    out.angles.beta = std::atan2(s, std::hypot(r(2, 1), r(2, 2)));
    out.angles.alpha = std::atan2(r(2, 1), r(2, 2));
    out.angles.gamma = std::atan2(r(1, 0), r(0, 0));
  }
  out.angles.alpha = wrap_angle(out.angles.alpha);
  out.angles.beta = wrap_angle(out.angles.beta);
  out.angles.gamma = wrap_angle(out.angles.gamma);
  return out;
}

double orthonormality_error(const RotMat& r) {
  const double ortho = (r.transpose() * r - RotMat::Identity()).cwiseAbs().maxCoeff();
  return std::max(ortho, std::abs(r.determinant() - 1.0));
}

Vec6 pose_to_vector(const Pose& p) {
  const auto e = rotmat_to_euler(p.orientation).angles;
  Vec6 v;
  v << p.position, e.alpha, e.beta, e.gamma;
  return v;
}

Pose vector_to_pose(const Vec6& v) {
  return {v.head<3>(), euler_to_rotmat({v(3), v(4), v(5)})};
}

double rotation_distance(const RotMat& a, const RotMat& b) {
  const double c = std::clamp(((a.transpose() * b).trace() - 1.0) / 2.0, -1.0, 1.0);
  // acos loses precision near zero; use the skew part there.
  const RotMat d = a.transpose() * b;
  const Vec3 w{d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)};
  return std::atan2(0.5 * w.norm(), c);
}

Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
  const Vec3 z = (target - eye).normalized();
  Vec3 x = z.cross(up);
  if (x.norm() < 1e-9) throw GeometryError("look_at: view direction parallel to up vector");
  x.normalize();
  const Vec3 y = z.cross(x);
  RotMat r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return {eye, r};
}

}  // namespace eep
