#pragma once

// Camera extrinsic refinement from a rough prior pose and known marker points.

#include "eep/geometry.hpp"
#include "eep/optimizers.hpp"

#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

namespace eep {

struct MarkerObservation {
  int marker_id = 0;
  Vec3 world;  // mm
  Vec2 pixel;  // px
};

/// Known markers and their image correspondences, keyed by camera id.
struct MarkerSet {
  std::map<int, Vec3> markers;
  std::map<int, std::vector<std::pair<int, Vec2>>> image_points;

  /// Joins markers with one camera's image points; checks the count and id uniqueness.
  [[nodiscard]] std::vector<MarkerObservation> observations(int camera_id) const;
};

struct ChessboardPrior {
  Pose prior_pose;
  double position_uncertainty = 40.0;     // mm
  double orientation_uncertainty = 0.09;  // rad
};

class CalibrationError : public std::runtime_error {
 public:
  CalibrationError(const std::string& what, Pose best, std::vector<double> history)
      : std::runtime_error(what), best_pose(std::move(best)), residual_history(std::move(history)) {}

  Pose best_pose;
  std::vector<double> residual_history;
};

/// Stacked per-marker reprojection residuals (observed - projected), length 2 * markers.
/// Throws GeometryError when a marker falls behind the candidate camera.
Eigen::VectorXd marker_residuals(const Vec6& candidate, const Intrinsics& intrinsics,
                                 std::span<const MarkerObservation> markers);

/// Root-mean-square reprojection distance in pixels.
double reprojection_rms(const Pose& camera, const Intrinsics& intrinsics, std::span<const MarkerObservation> markers);

struct RefinedPose {
  Pose pose;
  double prior_rms_px = 0.0;
  double refined_rms_px = 0.0;
  int iterations = 0;
};

RefinedPose refine_camera_pose(const ChessboardPrior& prior, const Intrinsics& intrinsics,
                               std::span<const MarkerObservation> markers, const LMConfig& cfg = {});

/// Rows: camera_id, marker_id, x_w, y_w, z_w, u_px, v_px.
MarkerSet read_marker_file(const std::filesystem::path& path);
void write_marker_file(const std::filesystem::path& path, const MarkerSet& set);

/// Rows: camera_id, x, y, z, alpha, beta, gamma (mm, rad).
std::map<int, Pose> read_pose_file(const std::filesystem::path& path);
void write_pose_file(const std::filesystem::path& path, const std::map<int, Pose>& poses);

}  // namespace eep
