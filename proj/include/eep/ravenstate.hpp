#pragma once

// Fixed layout of the 118-float robot state vector (one arm).
//
//   0..2    reported position (forward kinematics of current joints), mm
//   3..11   reported rotation matrix, row-major
//   12..14  desired position, mm
//   15..23  desired rotation matrix, row-major
//   24..30  current joints (rad, insertion in mm)
//   31..37  desired joints
//   38..44  motor positions (joint value times gear ratio)
//   45..51  motor velocities, low-pass filtered
//   52..58  joint velocities
//   59..65  desired joint velocities
//   66..72  motor torques, N mm (insertion: N)
//   73..79  gravity torques
//   80      desired grasper opening, rad
//   81..87  motor encoder counts
//   88..90  Cartesian linear velocity, mm/s
//   91..93  Cartesian angular velocity, rad/s
//   94..96  estimated Cartesian force, N
//   97..99  estimated Cartesian moment about the remote center, N mm
//   100..106 joint accelerations
//   107..113 joint tracking error (desired - current)
//   114     run level
//   115     sublevel
//   116     control mode
//   117     padding (zero)

#include <array>
#include <string>
#include <vector>

namespace eep {

inline constexpr int kFeatureCount = 118;
inline constexpr int kLabelCount = 3;
inline constexpr int kFeatureLayoutVersion = 1;

namespace rs {
inline constexpr int reported_pos = 0;
inline constexpr int reported_rot = 3;
inline constexpr int desired_pos = 12;
inline constexpr int desired_rot = 15;
inline constexpr int joints = 24;
inline constexpr int desired_joints = 31;
inline constexpr int motor_pos = 38;
inline constexpr int motor_vel = 45;
inline constexpr int joint_vel = 52;
inline constexpr int desired_joint_vel = 59;
inline constexpr int motor_torque = 66;
inline constexpr int gravity_torque = 73;
inline constexpr int desired_grasp = 80;
inline constexpr int encoder = 81;
inline constexpr int cart_vel = 88;
inline constexpr int cart_ang_vel = 91;
inline constexpr int cart_force = 94;
inline constexpr int cart_moment = 97;
inline constexpr int joint_acc = 100;
inline constexpr int joint_err = 107;
inline constexpr int run_level = 114;
inline constexpr int sublevel = 115;
inline constexpr int mode = 116;
inline constexpr int padding = 117;
}  // namespace rs

using FeatureVector = std::array<double, kFeatureCount>;

/// One name per feature, in layout order ("reported_pos.x", "joints.3", ...).
const std::vector<std::string>& feature_names();

}  // namespace eep
