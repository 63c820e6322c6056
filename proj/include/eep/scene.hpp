#pragma once

// Synthetic measurement scene: four-camera rig, ground markers, end-effector
// ball rig poses and clutter bars for the detection corpus.

#include "eep/camera_calibration.hpp"
#include "eep/effector_solver.hpp"
#include "eep/image_pipeline.hpp"

#include <map>
#include <random>
#include <vector>

namespace eep {

using Rng = std::mt19937_64;

struct RigGeometry {
  int cameras = 4;
  double distance = 700.0;         // mm, camera to target
  double elevation = 0.4363323129985824;  // rad (25 deg) above the horizontal
  double first_azimuth = 0.7853981633974483;  // rad; cameras are spaced evenly in azimuth
  Vec3 target = Vec3::Zero();
  Intrinsics intrinsics{};
};

/// Cameras keyed 0..n-1, each looking at the target.
std::map<int, CameraModel> make_camera_rig(const RigGeometry& geometry = {});
std::vector<CameraModel> camera_list(const std::map<int, CameraModel>& cams);

/// 16 markers: two heights at 8 locations on a ring around the workspace, spread to fill the views.
std::map<int, Vec3> default_marker_layout(double ring_radius = 300.0);

/// Projects every marker into every camera, with optional Gaussian pixel noise.
MarkerSet observe_markers(const std::map<int, CameraModel>& cams, const std::map<int, Vec3>& markers,
                          double noise_px, Rng& rng);

Vec3 random_unit_vector(Rng& rng);

/// Pose displaced by exactly `position_mm` in a random direction and rotated by
/// exactly `rotation_rad` about a random axis.
Pose perturb_pose(const Pose& pose, double position_mm, double rotation_rad, Rng& rng);

struct WorkspaceBox {
  Vec3 lo{-60.0, -60.0, -60.0};
  Vec3 hi{60.0, 60.0, 60.0};

  [[nodiscard]] bool contains(const Vec3& p) const;
};

std::vector<SceneBall> rig_balls(const Pose& effector, const MarkerRigSpec& rig);
std::vector<SceneBall> rig_balls(const RigCenters& centers);

struct SceneOptions {
  WorkspaceBox box{};
  double max_tilt = 0.6;            // rad, rig normal away from vertical
  double max_occlusion = 0.3;       // largest border fraction hidden in any view
  double occluder_probability = 0.3;  // per view
  int max_attempts = 1000;
};

struct SceneFrame {
  EffectorPose truth;
  std::vector<SceneBall> balls;
  std::vector<std::vector<Occluder>> occluders;  // per camera, in camera_list order
};

/// Random effector pose whose three balls are fully inside every view with
/// at most `max_occlusion` of any ball border hidden.
SceneFrame random_scene_frame(const std::vector<CameraModel>& cams, const MarkerRigSpec& rig,
                              const SceneOptions& options, Rng& rng);

/// Small random move of the previous frame (at most step_mm and step_rad), falling back
/// to a fresh random frame when no admissible move is found.
SceneFrame next_scene_frame(const SceneFrame& prev, const std::vector<CameraModel>& cams, const MarkerRigSpec& rig,
                            const SceneOptions& options, double step_mm, double step_rad, Rng& rng);

}  // namespace eep
