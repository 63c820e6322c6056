#include "eep/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace eep {

std::map<int, CameraModel> make_camera_rig(const RigGeometry& g) {
  if (g.cameras < 2) throw std::invalid_argument("rig needs at least two cameras");
  g.intrinsics.validate();
  std::map<int, CameraModel> cams;
  for (int k = 0; k < g.cameras; ++k) {
    const double az = g.first_azimuth + 2.0 * std::numbers::pi * k / g.cameras;
    const Vec3 dir{std::cos(g.elevation) * std::cos(az), std::cos(g.elevation) * std::sin(az), std::sin(g.elevation)};
    cams[k] = CameraModel{look_at(g.target + g.distance * dir, g.target), g.intrinsics};
  }
  return cams;
}

std::vector<CameraModel> camera_list(const std::map<int, CameraModel>& cams) {
  std::vector<CameraModel> out;
  for (const auto& [id, c] : cams) out.push_back(c);
  return out;
}

std::map<int, Vec3> default_marker_layout(double ring_radius) {
  std::map<int, Vec3> out;
  for (int k = 0; k < 8; ++k) {
    const double a = std::numbers::pi * k / 4.0 + std::numbers::pi / 8.0;
    const Vec3 base{ring_radius * std::cos(a), ring_radius * std::sin(a), 0.0};
    out[2 * k] = base + Vec3(0, 0, -100.0);
    out[2 * k + 1] = base + Vec3(0, 0, 180.0);
  }
  return out;
}

MarkerSet observe_markers(const std::map<int, CameraModel>& cams, const std::map<int, Vec3>& markers,
                          double noise_px, Rng& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  MarkerSet set;
  set.markers = markers;
  for (const auto& [cid, cam] : cams) {
    auto& pts = set.image_points[cid];
    for (const auto& [mid, p] : markers) {
      Vec2 px = cam.project(p);
      if (noise_px > 0) px += noise_px * Vec2(noise(rng), noise(rng));
      pts.emplace_back(mid, px);
    }
  }
  return set;
}

Vec3 random_unit_vector(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    const Vec3 v{n(rng), n(rng), n(rng)};
    if (v.norm() > 1e-6) return v.normalized();
  }
}

Pose perturb_pose(const Pose& pose, double position_mm, double rotation_rad, Rng& rng) {
  Pose out;
  out.position = pose.position + position_mm * random_unit_vector(rng);
  out.orientation = Eigen::AngleAxisd(rotation_rad, random_unit_vector(rng)).toRotationMatrix() * pose.orientation;
  return out;
}

bool WorkspaceBox::contains(const Vec3& p) const {
  return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
}

std::vector<SceneBall> rig_balls(const RigCenters& c) {
  return {{BallColor::red, c.red}, {BallColor::green, c.green}, {BallColor::yellow, c.yellow}};
}

std::vector<SceneBall> rig_balls(const Pose& effector, const MarkerRigSpec& rig) {
  return rig_balls(rig_forward(effector, rig));
}

namespace {

// Checks visibility and occlusion of the rig at `pose` and adds clutter bars.
bool admit_frame(const std::vector<CameraModel>& cams, const MarkerRigSpec& rig, const SceneOptions& opt, Rng& rng,
                 const EffectorPose& pose, SceneFrame& f) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uniform = [&](double a, double b) { return a + (b - a) * u01(rng); };
  if (!opt.box.contains(pose.position)) return false;
  f.truth = pose;
  f.balls = rig_balls(pose.pose(), rig);
  f.occluders.clear();
  for (const auto& cam : cams) {
    const auto proj = project_scene(cam, f.balls, rig.ball_radius);
    for (const auto& pb : proj) {
      if (!pb.visible || pb.arc_occlusion > opt.max_occlusion) return false;
    }
    std::vector<Occluder> occ;
    if (u01(rng) < opt.occluder_probability) {
      // A bar crossing near one ball, like a tool shaft passing in front.
      const auto& target = proj[static_cast<std::size_t>(u01(rng) * static_cast<double>(proj.size())) % proj.size()];
      const double ang = uniform(0.0, std::numbers::pi);
      const Vec2 dir{std::cos(ang), std::sin(ang)};
      const Vec2 normal{-dir.y(), dir.x()};
      const Vec2 mid = target.center + normal * target.radius * uniform(0.75, 1.3);
      occ.push_back({mid - 3.0 * target.radius * dir, mid + 3.0 * target.radius * dir, uniform(2.0, 4.0)});
      for (const auto& pb : project_scene(cam, f.balls, rig.ball_radius, occ)) {
        if (pb.arc_occlusion > opt.max_occlusion) {
          occ.clear();
          break;
        }
      }
    }
    f.occluders.push_back(std::move(occ));
  }
  return true;
}

}  // namespace

SceneFrame random_scene_frame(const std::vector<CameraModel>& cams, const MarkerRigSpec& rig,
                              const SceneOptions& opt, Rng& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uniform = [&](double a, double b) { return a + (b - a) * u01(rng); };
  SceneFrame f;
  for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
    const Vec3 p{uniform(opt.box.lo.x(), opt.box.hi.x()), uniform(opt.box.lo.y(), opt.box.hi.y()),
                 uniform(opt.box.lo.z(), opt.box.hi.z())};
    // Rig plane near horizontal: yaw anywhere, normal tilted by at most max_tilt.
    const double tilt = opt.max_tilt * std::sqrt(u01(rng));
    const double tilt_dir = uniform(-std::numbers::pi, std::numbers::pi);
    const RotMat r = Eigen::AngleAxisd(tilt, Vec3(std::cos(tilt_dir), std::sin(tilt_dir), 0.0)).toRotationMatrix() *
                     rot_z(uniform(-std::numbers::pi, std::numbers::pi));
    if (admit_frame(cams, rig, opt, rng, EffectorPose{p, rotmat_to_euler(r).angles, 0.0}, f)) return f;
  }
  throw std::runtime_error("no admissible scene frame within the attempt budget");
}

SceneFrame next_scene_frame(const SceneFrame& prev, const std::vector<CameraModel>& cams, const MarkerRigSpec& rig,
                            const SceneOptions& opt, double step_mm, double step_rad, Rng& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  SceneFrame f;
  for (int attempt = 0; attempt < 50; ++attempt) {
    const Pose moved = perturb_pose(prev.truth.pose(), step_mm * u01(rng), step_rad * u01(rng), rng);
    const double tilt = std::acos(std::clamp(moved.orientation(2, 2), -1.0, 1.0));
    if (tilt > opt.max_tilt) continue;
    if (admit_frame(cams, rig, opt, rng, EffectorPose{moved.position, rotmat_to_euler(moved.orientation).angles, 0.0},
                    f)) {
      return f;
    }
  }
  return random_scene_frame(cams, rig, opt, rng);
}

}  // namespace eep
