#include "eep/geometry.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <numbers>

namespace eep {
namespace {

using testing::random_rotation;
using testing::uniform;

constexpr double kPi = std::numbers::pi;

// Elementary rotations written out by hand, independent of rot_x / rot_y / rot_z.
RotMat hand_rx(double a) {
  RotMat r;
  r << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return r;
}
RotMat hand_ry(double a) {
  RotMat r;
  r << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return r;
}
RotMat hand_rz(double a) {
  RotMat r;
  r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return r;
}

CameraModel axis_camera() { return CameraModel{Pose{}, Intrinsics{}}; }

TEST(Euler, ZeroIsIdentity) {
  EXPECT_TRUE(euler_to_rotmat({0, 0, 0}).isApprox(RotMat::Identity(), 0.0));
}

TEST(Euler, QuarterTurnAboutZ) {
  RotMat want;
  want << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  EXPECT_LT((euler_to_rotmat({0, 0, kPi / 2}) - want).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Euler, MatchesHandProduct) {
  const RotMat want = hand_rz(0.3) * hand_ry(0.2) * hand_rx(0.1);
  EXPECT_LT((euler_to_rotmat({0.1, 0.2, 0.3}) - want).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT(orthonormality_error(euler_to_rotmat({0.1, 0.2, 0.3})), 1e-12);
}

TEST(Euler, IdentityDecomposesToZero) {
  const auto d = rotmat_to_euler(RotMat::Identity());
  EXPECT_FALSE(d.gimbal_lock);
  EXPECT_EQ(d.angles.alpha, 0.0);
  EXPECT_EQ(d.angles.beta, 0.0);
  EXPECT_EQ(d.angles.gamma, 0.0);
}

TEST(Euler, RoundTripKnownAngles) {
  const auto d = rotmat_to_euler(euler_to_rotmat({0.1, 0.2, 0.3}));
  EXPECT_NEAR(d.angles.alpha, 0.1, 1e-9);
  EXPECT_NEAR(d.angles.beta, 0.2, 1e-9);
  EXPECT_NEAR(d.angles.gamma, 0.3, 1e-9);
}

TEST(Euler, RandomRotationsRecompose) {
  std::mt19937 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const RotMat r = random_rotation(rng);
    const auto d = rotmat_to_euler(r);
    EXPECT_LT((euler_to_rotmat(d.angles) - r).cwiseAbs().maxCoeff(), 1e-9) << "trial " << i;
  }
}

TEST(Euler, RandomAnglesRoundTrip) {
  std::mt19937 rng(12);
  for (int i = 0; i < 1000; ++i) {
    const EulerAngles e{uniform(rng, -3.1, 3.1), uniform(rng, -1.5, 1.5), uniform(rng, -3.1, 3.1)};
    const auto d = rotmat_to_euler(euler_to_rotmat(e));
    EXPECT_NEAR(d.angles.alpha, e.alpha, 1e-9);
    EXPECT_NEAR(d.angles.beta, e.beta, 1e-9);
    EXPECT_NEAR(d.angles.gamma, e.gamma, 1e-9);
  }
}

TEST(Euler, GimbalLockFlaggedAndConsistent) {
  for (const double beta : {kPi / 2, -kPi / 2}) {
    const RotMat r = euler_to_rotmat({0.4, beta, -0.7});
    const auto d = rotmat_to_euler(r);
    EXPECT_TRUE(d.gimbal_lock);
    EXPECT_LT((euler_to_rotmat(d.angles) - r).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Euler, AnglesWrappedIntoHalfOpenRange) {
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_NEAR(wrap_angle(3 * kPi / 2), -kPi / 2, 1e-15);
}

TEST(Project, OpticalAxisHitsPrincipalPoint) {
  const CameraModel cam = axis_camera();
  for (const double z : {1.0, 250.0, 1e4}) {
    const Vec2 px = cam.project({0, 0, z});
    EXPECT_DOUBLE_EQ(px.x(), 320.0);
    EXPECT_DOUBLE_EQ(px.y(), 240.0);
  }
}

TEST(Project, KnownPoint) {
  const Vec2 px = axis_camera().project({100, 0, 1000});
  // 500 * 100 / 1000 + 320
  EXPECT_NEAR(px.x(), 370.0, 1e-12);
  EXPECT_NEAR(px.y(), 240.0, 1e-12);
}

TEST(Project, RejectsPointsBehind) {
  EXPECT_THROW((void)axis_camera().project({0, 0, 0}), GeometryError);
  EXPECT_THROW((void)axis_camera().project({10, 0, -5}), GeometryError);
}

TEST(Backproject, PrincipalPointAlongAxis) {
  std::mt19937 rng(3);
  const CameraModel cam{Pose{{1, 2, 3}, random_rotation(rng)}, Intrinsics{}};
  const Ray ray = cam.backproject({320, 240});
  EXPECT_TRUE(ray.origin().isApprox(cam.pose.position));
  EXPECT_LT((ray.direction() - cam.pose.orientation.col(2)).norm(), 1e-15);
}

TEST(Backproject, ProjectThenBackprojectPassesThroughPoint) {
  std::mt19937 rng(4);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 eye = testing::random_vec(rng, -800, 800);
    const Vec3 target = testing::random_vec(rng, -50, 50);
    if ((eye - target).norm() < 100) continue;
    const CameraModel cam{look_at(eye, target), Intrinsics{}};
    const Vec3 p = target + testing::random_vec(rng, -40, 40);
    if (cam.depth(p) <= 1.0) continue;
    const Ray ray = cam.backproject(cam.project(p));
    EXPECT_LT(ray.distance_to(p), 1e-9);
    EXPECT_NEAR(ray.direction().norm(), 1.0, 1e-12);
  }
}

// Componentwise ratio identity between the camera-to-marker vector and the
// unnormalized image-to-camera vector.
TEST(Backproject, RatioIdentityOn16Markers) {
  const CameraModel cam{look_at({500, -300, 400}, {0, 0, -60}), Intrinsics{}};
  for (int k = 0; k < 8; ++k) {
    const double a = kPi * k / 4 + kPi / 8;
    for (const double z : {-120.0, -20.0}) {
      const Vec3 m{150 * std::cos(a), 150 * std::sin(a), z};
      const Vec3 v_c2m = m - cam.pose.position;
      const Vec3 v_i2c = cam.image_to_camera_vector(cam.project(m));
      const double ratio = v_c2m.norm() / v_i2c.norm();
      for (int c = 0; c < 3; ++c) {
        if (std::abs(v_i2c(c)) < 1e-6) continue;
        EXPECT_NEAR(v_c2m(c) / v_i2c(c), ratio, 1e-9 * ratio);
      }
    }
  }
}

TEST(Ray, RejectsZeroDirection) { EXPECT_THROW(Ray(Vec3::Zero(), Vec3::Zero()), GeometryError); }

TEST(Intrinsics, Validation) {
  Intrinsics in;
  in.focal_px = 0;
  EXPECT_THROW(in.validate(), GeometryError);
  in = Intrinsics{};
  in.principal_point = {700, 10};
  EXPECT_THROW(in.validate(), GeometryError);
}

TEST(Pose, VectorRoundTrip) {
  std::mt19937 rng(5);
  for (int i = 0; i < 200; ++i) {
    const Pose p{testing::random_vec(rng, -100, 100), random_rotation(rng)};
    const Pose q = vector_to_pose(pose_to_vector(p));
    EXPECT_LT((q.position - p.position).norm(), 1e-12);
    EXPECT_LT(rotation_distance(q.orientation, p.orientation), 1e-9);
  }
}

TEST(Pose, RotationDistanceOfKnownAngle) {
  EXPECT_NEAR(rotation_distance(RotMat::Identity(), rot_y(0.3)), 0.3, 1e-15);
  EXPECT_NEAR(rotation_distance(rot_x(1e-9), RotMat::Identity()), 1e-9, 1e-20);
}

TEST(LookAt, PointsOpticalAxisAtTarget) {
  const Pose p = look_at({700, 0, 300}, {0, 0, 0});
  EXPECT_LT(orthonormality_error(p.orientation), 1e-12);
  const CameraModel cam{p, Intrinsics{}};
  const Vec2 px = cam.project({0, 0, 0});
  EXPECT_NEAR(px.x(), 320, 1e-9);
  EXPECT_NEAR(px.y(), 240, 1e-9);
  // Image y points down: a point above the target lands above the center.
  EXPECT_LT(cam.project({0, 0, 50}).y(), 240);
}

}  // namespace
}  // namespace eep
