#include "eep/camera_calibration.hpp"

#include "eep/text_table.hpp"

#include <cmath>
#include <set>

namespace eep {

std::vector<MarkerObservation> MarkerSet::observations(int camera_id) const {
  const auto it = image_points.find(camera_id);
  if (it == image_points.end()) throw GeometryError("no marker observations for camera " + std::to_string(camera_id));
  std::vector<MarkerObservation> out;
  std::set<int> seen;
  for (const auto& [id, px] : it->second) {
    if (!seen.insert(id).second) throw GeometryError("duplicate marker id " + std::to_string(id));
    const auto m = markers.find(id);
    if (m == markers.end()) throw GeometryError("image point for unknown marker " + std::to_string(id));
    out.push_back({id, m->second, px});
  }
  if (out.size() < 3) throw GeometryError("at least 3 markers are needed per camera");
  return out;
}

Eigen::VectorXd marker_residuals(const Vec6& candidate, const Intrinsics& intrinsics,
                                 std::span<const MarkerObservation> markers) {
  const CameraModel cam{vector_to_pose(candidate), intrinsics};
  Eigen::VectorXd r(2 * static_cast<Eigen::Index>(markers.size()));
  for (std::size_t i = 0; i < markers.size(); ++i) {
    const Vec2 predicted = cam.project(markers[i].world);
    r.segment<2>(2 * static_cast<Eigen::Index>(i)) = markers[i].pixel - predicted;
  }
  return r;
}

double reprojection_rms(const Pose& camera, const Intrinsics& intrinsics, std::span<const MarkerObservation> markers) {
  const Eigen::VectorXd r = marker_residuals(pose_to_vector(camera), intrinsics, markers);
  return std::sqrt(r.squaredNorm() / static_cast<double>(markers.size()));
}

RefinedPose refine_camera_pose(const ChessboardPrior& prior, const Intrinsics& intrinsics,
                               std::span<const MarkerObservation> markers, const LMConfig& cfg) {
  if (markers.size() < 3) throw GeometryError("at least 3 markers are needed per camera");
  intrinsics.validate();

  // Keep the candidate in the vector form used by the residual so the prior round-trips exactly.
  const Vec6 x0 = pose_to_vector(prior.prior_pose);
  RefinedPose out;
  out.prior_rms_px = reprojection_rms(prior.prior_pose, intrinsics, markers);

  const ResidualFn residual = [&](const Eigen::VectorXd& x) {
    return marker_residuals(Vec6(x), intrinsics, markers);
  };
  const OptResult res = levenberg_marquardt(residual, x0, cfg);
  const Pose best = vector_to_pose(Vec6(res.solution));
  if (!res.converged) {
    throw CalibrationError("camera refinement did not converge", best, res.trace);
  }
  out.pose = best;
  out.refined_rms_px = std::sqrt(res.final_objective / static_cast<double>(markers.size()));
  out.iterations = res.iterations;
  return out;
}

MarkerSet read_marker_file(const std::filesystem::path& path) {
  const TextTable t = read_table(path);
  MarkerSet set;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const int cam = static_cast<int>(t.integer(i, "camera_id"));
    const int id = static_cast<int>(t.integer(i, "marker_id"));
    const Vec3 w{t.number(i, "x_w"), t.number(i, "y_w"), t.number(i, "z_w")};
    const auto [it, inserted] = set.markers.emplace(id, w);
    if (!inserted && (it->second - w).norm() > 0.0) {
      throw FormatError("marker " + std::to_string(id) + " has inconsistent world coordinates");
    }
    set.image_points[cam].emplace_back(id, Vec2{t.number(i, "u_px"), t.number(i, "v_px")});
  }
  return set;
}

void write_marker_file(const std::filesystem::path& path, const MarkerSet& set) {
  TextTable t;
  t.header = {"camera_id", "marker_id", "x_w", "y_w", "z_w", "u_px", "v_px"};
  for (const auto& [cam, points] : set.image_points) {
    for (const auto& [id, px] : points) {
      const Vec3& w = set.markers.at(id);
      t.rows.push_back({std::to_string(cam), std::to_string(id), format_double(w.x()), format_double(w.y()),
                        format_double(w.z()), format_double(px.x()), format_double(px.y())});
    }
  }
  write_table(path, t, {"marker correspondences: world mm, image px"});
}

std::map<int, Pose> read_pose_file(const std::filesystem::path& path) {
  const TextTable t = read_table(path);
  std::map<int, Pose> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    Vec6 v;
    v << t.number(i, "x"), t.number(i, "y"), t.number(i, "z"), t.number(i, "alpha"), t.number(i, "beta"),
        t.number(i, "gamma");
    out[static_cast<int>(t.integer(i, "camera_id"))] = vector_to_pose(v);
  }
  return out;
}

void write_pose_file(const std::filesystem::path& path, const std::map<int, Pose>& poses) {
  TextTable t;
  t.header = {"camera_id", "x", "y", "z", "alpha", "beta", "gamma"};
  for (const auto& [cam, pose] : poses) {
    const Vec6 v = pose_to_vector(pose);
    t.rows.push_back({std::to_string(cam)});
    for (int k = 0; k < 6; ++k) t.rows.back().push_back(format_double(v(k)));
  }
  write_table(path, t,
              {"camera poses in the world frame: position mm, orientation R = Rz(gamma) Ry(beta) Rx(alpha) rad"});
}

}  // namespace eep
