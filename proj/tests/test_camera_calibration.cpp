#include "eep/camera_calibration.hpp"
#include "eep/scene.hpp"
#include "eep/text_table.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

namespace eep {
namespace {

struct Bench {
  std::map<int, CameraModel> cams = make_camera_rig();
  MarkerSet clean;

  Bench() {
    Rng rng(1);
    clean = observe_markers(cams, default_marker_layout(), 0.0, rng);
  }
};

const Bench& bench() {
  static const Bench b;
  return b;
}

TEST(MarkerResiduals, ZeroAtTruth) {
  const auto& b = bench();
  for (const auto& [id, cam] : b.cams) {
    const auto obs = b.clean.observations(id);
    const Eigen::VectorXd r = marker_residuals(pose_to_vector(cam.pose), cam.intrinsics, obs);
    EXPECT_EQ(r.size(), 32);
    EXPECT_LT(r.cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(MarkerResiduals, OffsetAlongCameraX) {
  // Camera at the origin looking down +z; a marker on the axis at 1000 mm.
  const std::vector<MarkerObservation> obs{{0, {0, 0, 1000}, {320, 240}}};
  Vec6 cand = Vec6::Zero();
  cand(0) = 10.0;
  const Eigen::VectorXd r = marker_residuals(cand, Intrinsics{}, obs);
  // Shifting the camera +10 mm moves the marker -10 mm in the camera frame: 500 * 10 / 1000 px.
  EXPECT_NEAR(r(0), 5.0, 1e-12);
  EXPECT_NEAR(r(1), 0.0, 1e-12);
}

TEST(MarkerResiduals, ZeroSetMatchesRatioIdentity) {
  // Wherever the pixel residual vanishes the back-projected direction is parallel to the marker direction.
  const auto& b = bench();
  const CameraModel& cam = b.cams.at(2);
  for (const auto& m : b.clean.observations(2)) {
    const Vec3 v_c2m = m.world - cam.pose.position;
    const Vec3 v_i2c = cam.image_to_camera_vector(m.pixel);
    EXPECT_LT(v_c2m.normalized().cross(v_i2c.normalized()).norm(), 1e-9);
  }
}

TEST(MarkerResiduals, MarkerBehindCameraRejected) {
  const std::vector<MarkerObservation> obs{{0, {0, 0, -100}, {320, 240}}};
  EXPECT_THROW(marker_residuals(Vec6::Zero(), Intrinsics{}, obs), GeometryError);
}

TEST(Refine, PriorAtTruthStaysPut) {
  const auto& b = bench();
  const auto obs = b.clean.observations(0);
  const RefinedPose r = refine_camera_pose({b.cams.at(0).pose}, Intrinsics{}, obs);
  EXPECT_LT((r.pose.position - b.cams.at(0).pose.position).norm(), 1e-9);
  EXPECT_LT(r.refined_rms_px, 1e-9);
}

TEST(Refine, Recovers40mm5DegPriorsExactly) {
  const auto& b = bench();
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    for (const auto& [id, cam] : b.cams) {
      const Pose prior = perturb_pose(cam.pose, 40.0, 5.0 * std::numbers::pi / 180, rng);
      const RefinedPose r = refine_camera_pose({prior}, Intrinsics{}, b.clean.observations(id));
      EXPECT_LT((r.pose.position - cam.pose.position).norm(), 1e-6);
      EXPECT_LT(rotation_distance(r.pose.orientation, cam.pose.orientation), 1e-8);
      EXPECT_LE(r.refined_rms_px, r.prior_rms_px);
    }
  }
}

TEST(Refine, ThreeMarkersSuffice) {
  const auto& b = bench();
  auto obs = b.clean.observations(1);
  obs.resize(3);
  Rng rng(8);
  const Pose prior = perturb_pose(b.cams.at(1).pose, 10.0, 0.02, rng);
  const RefinedPose r = refine_camera_pose({prior}, Intrinsics{}, obs);
  EXPECT_LT((r.pose.position - b.cams.at(1).pose.position).norm(), 1e-6);
}

TEST(Refine, TooFewMarkers) {
  const auto& b = bench();
  auto obs = b.clean.observations(0);
  obs.resize(2);
  EXPECT_THROW(refine_camera_pose({b.cams.at(0).pose}, Intrinsics{}, obs), GeometryError);
}

TEST(Refine, NeverDegradesUnderNoise) {
  const auto& b = bench();
  Rng rng(9);
  for (int trial = 0; trial < 40; ++trial) {
    const MarkerSet noisy = observe_markers(b.cams, default_marker_layout(), 1.0, rng);
    for (const auto& [id, cam] : b.cams) {
      const Pose prior = perturb_pose(cam.pose, 40.0, 0.087, rng);
      const RefinedPose r = refine_camera_pose({prior}, Intrinsics{}, noisy.observations(id));
      EXPECT_LE(r.refined_rms_px, r.prior_rms_px);
    }
  }
}

TEST(Refine, MedianErrorGrowsWithPixelNoise) {
  const auto& b = bench();
  const CameraModel& cam = b.cams.at(0);
  double previous = -1.0;
  for (const double sigma : {0.0, 0.25, 0.5, 1.0}) {
    Rng rng(100);
    std::vector<double> err;
    for (int trial = 0; trial < 60; ++trial) {
      const MarkerSet noisy = observe_markers({{0, cam}}, default_marker_layout(), sigma, rng);
      const Pose prior = perturb_pose(cam.pose, 40.0, 0.087, rng);
      err.push_back((refine_camera_pose({prior}, Intrinsics{}, noisy.observations(0)).pose.position -
                     cam.pose.position)
                        .norm());
    }
    const double med = testing::median(err);
    EXPECT_GE(med, previous) << "sigma " << sigma;
    previous = med;
  }
}

TEST(MarkerSet, ObservationChecks) {
  MarkerSet s = bench().clean;
  EXPECT_THROW((void)s.observations(9), GeometryError);
  s.image_points[0].push_back(s.image_points[0].front());
  EXPECT_THROW((void)s.observations(0), GeometryError);
}

TEST(Files, MarkerAndPoseRoundTrip) {
  const auto dir = testing::scratch_dir("calib_files");
  const auto& b = bench();
  write_marker_file(dir / "markers.txt", b.clean);
  const MarkerSet back = read_marker_file(dir / "markers.txt");
  ASSERT_EQ(back.markers.size(), 16u);
  for (const auto& [id, p] : b.clean.markers) EXPECT_EQ(back.markers.at(id), p);
  EXPECT_EQ(back.image_points.at(3), b.clean.image_points.at(3));

  std::map<int, Pose> poses;
  for (const auto& [id, c] : b.cams) poses[id] = c.pose;
  write_pose_file(dir / "cams.txt", poses);
  const auto again = read_pose_file(dir / "cams.txt");
  ASSERT_EQ(again.size(), 4u);
  for (const auto& [id, p] : poses) {
    EXPECT_LT((again.at(id).position - p.position).norm(), 1e-12);
    EXPECT_LT(rotation_distance(again.at(id).orientation, p.orientation), 1e-12);
  }
  const TextTable t = read_table(dir / "cams.txt");
  EXPECT_EQ(t.header, (std::vector<std::string>{"camera_id", "x", "y", "z", "alpha", "beta", "gamma"}));
}

}  // namespace
}  // namespace eep
