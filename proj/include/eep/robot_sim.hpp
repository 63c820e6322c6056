#pragma once

// Synthetic cable-driven surgical arm: RAVEN-like spherical mechanism,
// teleoperation-like trajectories and a cable transmission error model.
//
// Joints: 0 shoulder (about world z), 1 elbow (about an axis tilted 75 deg
// from z), 2 tool insertion (mm, along the tool axis through the remote
// center), 3 tool roll, 4 wrist, 5 and 6 grasper jaws (no effect on the
// end-effector point).

#include "eep/dataset.hpp"
#include "eep/geometry.hpp"
#include "eep/ravenstate.hpp"

#include <random>
#include <stdexcept>
#include <vector>

namespace eep {

inline constexpr int kJoints = 7;
using JointVec = Eigen::Matrix<double, kJoints, 1>;
using Jacobian = Eigen::Matrix<double, 3, kJoints>;

class JointLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RobotGeometry {
  Vec3 remote_center = Vec3::Zero();
  double shoulder_angle = 1.3089969389957472;  // rad (75 deg), joint 0 axis to joint 1 axis
  double elbow_angle = 0.9075712110370514;     // rad (52 deg), joint 1 axis to tool axis
  double wrist_length = 13.0;                  // mm, wrist axis to end-effector point
  JointVec lower = (JointVec() << -1.6, -1.6, 0.0, -3.2, -1.6, -1.6, -1.6).finished();
  JointVec upper = (JointVec() << 1.6, 1.6, 350.0, 3.2, 1.6, 1.6, 1.6).finished();
};

/// Axis-aligned box in joint space that teleoperation explores.
struct JointWorkspace {
  JointVec lo = (JointVec() << -0.35, -0.35, 200.0, -1.2, -0.6, 0.0, 0.0).finished();
  JointVec hi = (JointVec() << 0.35, 0.35, 280.0, 1.2, 0.6, 0.6, 0.6).finished();
};

/// Throws JointLimitError outside the declared limits.
Pose forward_kinematics_pose(const JointVec& q, const RobotGeometry& g = {});
Vec3 forward_kinematics(const JointVec& q, const RobotGeometry& g = {});
/// Home position: forward kinematics of the zero configuration.
Vec3 home_position(const RobotGeometry& g = {});
/// Positional Jacobian by central differences (step 1e-6).
Jacobian position_jacobian(const JointVec& q, const RobotGeometry& g = {});

struct JointState {
  JointVec q = JointVec::Zero();
  JointVec qd = JointVec::Zero();
  JointVec qdd = JointVec::Zero();
};

struct Waypoint {
  double time = 0.0;
  JointVec q = JointVec::Zero();
};

/// Smooth path through waypoints: quintic Hermite segments (bounded jerk),
/// zero velocity at both ends.
struct Trajectory {
  int id = 0;
  std::vector<Waypoint> waypoints;

  [[nodiscard]] double duration() const;
  [[nodiscard]] JointState sample(double t) const;
  void validate() const;
};

struct TeleopConfig {
  JointWorkspace workspace{};
  double min_segment = 0.8;  // s
  double max_segment = 2.5;  // s
};

/// Reproducible for a fixed seed. Trajectory ids are first_id, first_id + 1, ...
std::vector<Trajectory> generate_teleop_trajectories(int count, double duration, std::uint64_t seed,
                                                     const TeleopConfig& cfg = {}, int first_id = 0);

struct CableErrorModel {
  JointVec sag_gain = JointVec::Zero();   // joint offset per unit motor torque
  JointVec backlash = JointVec::Zero();   // half-width, rad or mm
  JointVec noise_sigma = JointVec::Zero();
  Vec3 static_offset = Vec3::Zero();      // mm, Cartesian

  void validate() const;
  /// Default synthetic arm: roughly 6 mm RMS reported-vs-true position error.
  static CableErrorModel defaults();
  static CableErrorModel zero() { return {}; }
};

struct DynamicsParams {
  double tool_weight = 2.0;  // N, gravity load at the end effector (world -z)
  JointVec damping = (JointVec() << 400, 400, 0.02, 20, 10, 5, 5).finished();
  JointVec inertia = (JointVec() << 60, 60, 0.005, 2, 1, 0.5, 0.5).finished();
  double servo_time_constant = 0.01;    // s, first-order lag of the joint controller
  double velocity_filter = 0.05;        // s, motor velocity low-pass
  JointVec gear_ratio = (JointVec() << 12, 12, 4, 8, 8, 8, 8).finished();
  double encoder_counts_per_motor_rad = 651.9;  // 4096 / (2 pi)
};

struct SimConfig {
  double rate_hz = 1000.0;
  int record_every = 170;  // steps between recorded pairs
  RobotGeometry geometry{};
  DynamicsParams dynamics{};
  CableErrorModel cable = CableErrorModel::defaults();
  std::uint64_t noise_seed = 0;
};

struct SimSample {
  double timestamp = 0.0;
  FeatureVector state{};
  Vec3 true_position = Vec3::Zero();

  [[nodiscard]] Vec3 reported_position() const {
    return {state[rs::reported_pos], state[rs::reported_pos + 1], state[rs::reported_pos + 2]};
  }
  [[nodiscard]] Vec3 error() const { return true_position - reported_position(); }
};

/// Runs the 1000 Hz loop over the whole trajectory and returns every
/// record_every-th step, starting at step 0.
std::vector<SimSample> simulate_run(const Trajectory& traj, const SimConfig& cfg, double time_offset = 0.0);

/// Simulates every trajectory back to back and packs the result as a dataset.
Dataset simulate_dataset(const std::vector<Trajectory>& trajectories, const SimConfig& cfg);

/// Fraction of occupied cells of an n^3 grid over (joint 0, joint 1, insertion) of the workspace,
/// counting desired joints of every record.
double workspace_coverage(const Dataset& ds, const JointWorkspace& ws = {}, int cells = 8);

}  // namespace eep
