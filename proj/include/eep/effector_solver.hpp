#pragma once

// End-effector pose from the three triangulated ball centers.
//
// The rig places green at +x, yellow at +y and red at -x of the end-effector
// frame, each at distance d from its origin; the pose minimizes the summed
// squared distance between observed and predicted centers.

#include "eep/geometry.hpp"
#include "eep/optimizers.hpp"

#include <array>
#include <filesystem>
#include <stdexcept>
#include <vector>

namespace eep {

struct MarkerRigSpec {
  double d = 38.0;            // mm, end-effector point to each ball center
  double ball_radius = 20.0;  // mm
};

struct EffectorPose {
  Vec3 position = Vec3::Zero();
  EulerAngles orientation{};
  double residual_cost = 0.0;  // mm^2

  [[nodiscard]] Pose pose() const { return {position, euler_to_rotmat(orientation)}; }
};

/// Ball centers in the order green, yellow, red.
struct RigCenters {
  Vec3 green;
  Vec3 yellow;
  Vec3 red;
};

class DegenerateGeometry : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EffectorSolveError : public std::runtime_error {
 public:
  EffectorSolveError(const std::string& what, EffectorPose best) : std::runtime_error(what), best_pose(best) {}
  EffectorPose best_pose;
};

RigCenters rig_forward(const Pose& pose, const MarkerRigSpec& rig);
RigCenters rig_forward(const EffectorPose& pose, const MarkerRigSpec& rig);

double rig_cost(const Pose& pose, const MarkerRigSpec& rig, const RigCenters& observed);

/// Midpoint of green and red; x toward green, y toward yellow (orthogonalized), z = x cross y.
EffectorPose initial_guess(const RigCenters& observed);

/// Default simplex steps: 1 mm for position, 0.02 rad for angles.
NMConfig default_effector_nm_config();

EffectorPose solve_effector_pose(const RigCenters& observed, const MarkerRigSpec& rig,
                                 const NMConfig& cfg = default_effector_nm_config());

struct GroundTruthSample {
  double timestamp = 0.0;
  EffectorPose pose;
};

/// Rows: timestamp, x, y, z, alpha, beta, gamma, residual_cost.
void write_ground_truth(const std::filesystem::path& path, const std::vector<GroundTruthSample>& samples);
std::vector<GroundTruthSample> read_ground_truth(const std::filesystem::path& path);

}  // namespace eep
