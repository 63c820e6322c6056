#include "eep/robot_sim.hpp"

#include <algorithm>
#include <cmath>

namespace eep {

const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    auto group = [&n](const std::string& base, int count) {
      for (int i = 0; i < count; ++i) n.push_back(base + "." + std::to_string(i));
    };
    auto vec3 = [&n](const std::string& base) {
      for (const char* a : {"x", "y", "z"}) n.push_back(base + "." + a);
    };
    vec3("reported_pos");
    group("reported_rot", 9);
    vec3("desired_pos");
    group("desired_rot", 9);
    group("joints", 7);
    group("desired_joints", 7);
    group("motor_pos", 7);
    group("motor_vel", 7);
    group("joint_vel", 7);
    group("desired_joint_vel", 7);
    group("motor_torque", 7);
    group("gravity_torque", 7);
    n.push_back("desired_grasp");
    group("encoder", 7);
    vec3("cart_vel");
    vec3("cart_ang_vel");
    vec3("cart_force");
    vec3("cart_moment");
    group("joint_acc", 7);
    group("joint_err", 7);
    n.push_back("run_level");
    n.push_back("sublevel");
    n.push_back("mode");
    n.push_back("padding");
    return n;
  }();
  return names;
}

namespace {

Pose fk_unchecked(const JointVec& q, const RobotGeometry& g) {
  const RotMat tool = rot_z(q(0)) * rot_y(g.shoulder_angle) * rot_z(q(1)) * rot_y(g.elbow_angle);
  const RotMat wrist = tool * rot_z(q(3)) * rot_x(q(4));
  return {g.remote_center + q(2) * tool.col(2) + g.wrist_length * wrist.col(2), wrist};
}

void check_limits(const JointVec& q, const RobotGeometry& g) {
  for (int j = 0; j < kJoints; ++j) {
    if (!(q(j) >= g.lower(j) && q(j) <= g.upper(j))) {
      throw JointLimitError("joint " + std::to_string(j) + " value " + std::to_string(q(j)) + " outside [" +
                            std::to_string(g.lower(j)) + ", " + std::to_string(g.upper(j)) + "]");
    }
  }
}

Jacobian jacobian_unchecked(const JointVec& q, const RobotGeometry& g) {
  constexpr double h = 1e-6;
  Jacobian j;
  for (int k = 0; k < kJoints; ++k) {
    JointVec a = q, b = q;
    a(k) += h;
    b(k) -= h;
    j.col(k) = (fk_unchecked(a, g).position - fk_unchecked(b, g).position) / (2 * h);
  }
  return j;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Pose forward_kinematics_pose(const JointVec& q, const RobotGeometry& g) {
  check_limits(q, g);
  return fk_unchecked(q, g);
}

Vec3 forward_kinematics(const JointVec& q, const RobotGeometry& g) { return forward_kinematics_pose(q, g).position; }

Vec3 home_position(const RobotGeometry& g) { return forward_kinematics(JointVec::Zero(), g); }

Jacobian position_jacobian(const JointVec& q, const RobotGeometry& g) {
  check_limits(q, g);
  return jacobian_unchecked(q, g);
}

double Trajectory::duration() const { return waypoints.empty() ? 0.0 : waypoints.back().time; }

void Trajectory::validate() const {
  if (waypoints.size() < 2) throw std::invalid_argument("trajectory needs at least two waypoints");
  if (waypoints.front().time != 0.0) throw std::invalid_argument("trajectory must start at t = 0");
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    if (!(waypoints[i].time > waypoints[i - 1].time)) throw std::invalid_argument("waypoint times must increase");
  }
}

JointState Trajectory::sample(double t) const {
  t = std::clamp(t, 0.0, duration());
  const auto it = std::upper_bound(waypoints.begin(), waypoints.end(), t,
                                   [](double v, const Waypoint& w) { return v < w.time; });
  std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - waypoints.begin())) - 1;
  if (i + 1 >= waypoints.size()) i = waypoints.size() - 2;

  auto velocity = [this](std::size_t k) -> JointVec {
    if (k == 0 || k + 1 == waypoints.size()) return JointVec::Zero();
    return (waypoints[k + 1].q - waypoints[k - 1].q) / (waypoints[k + 1].time - waypoints[k - 1].time);
  };
  const Waypoint& w0 = waypoints[i];
  const Waypoint& w1 = waypoints[i + 1];
  const JointVec v0 = velocity(i), v1 = velocity(i + 1);
  const double T = w1.time - w0.time;
  const double s = (t - w0.time) / T;
  const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;

  // Quintic Hermite basis with zero end accelerations.
  const double h00 = 1 - 10 * s3 + 15 * s4 - 6 * s5, h01 = 10 * s3 - 15 * s4 + 6 * s5;
  const double h10 = s - 6 * s3 + 8 * s4 - 3 * s5, h11 = -4 * s3 + 7 * s4 - 3 * s5;
  const double d00 = -30 * s2 + 60 * s3 - 30 * s4, d01 = -d00;
  const double d10 = 1 - 18 * s2 + 32 * s3 - 15 * s4, d11 = -12 * s2 + 28 * s3 - 15 * s4;
  const double a00 = -60 * s + 180 * s2 - 120 * s3, a01 = -a00;
  const double a10 = -36 * s + 96 * s2 - 60 * s3, a11 = -24 * s + 84 * s2 - 60 * s3;

  JointState js;
  js.q = h00 * w0.q + h01 * w1.q + T * (h10 * v0 + h11 * v1);
  js.qd = (d00 * w0.q + d01 * w1.q) / T + d10 * v0 + d11 * v1;
  js.qdd = (a00 * w0.q + a01 * w1.q) / (T * T) + (a10 * v0 + a11 * v1) / T;
  return js;
}

std::vector<Trajectory> generate_teleop_trajectories(int count, double duration, std::uint64_t seed,
                                                     const TeleopConfig& cfg, int first_id) {
  if (count < 0) throw std::invalid_argument("trajectory count must be >= 0");
  if (!(duration > 0)) throw std::invalid_argument("trajectory duration must be positive");
  if (!(cfg.min_segment > 0 && cfg.max_segment >= cfg.min_segment)) {
    throw std::invalid_argument("bad teleoperation segment durations");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto random_point = [&] {
    JointVec q;
    for (int j = 0; j < kJoints; ++j) q(j) = cfg.workspace.lo(j) + (cfg.workspace.hi(j) - cfg.workspace.lo(j)) * u01(rng);
    return q;
  };

  std::vector<Trajectory> out;
  for (int k = 0; k < count; ++k) {
    Trajectory tr;
    tr.id = first_id + k;
    tr.waypoints.push_back({0.0, random_point()});
    double t = 0.0;
    while (t < duration) {
      t += cfg.min_segment + (cfg.max_segment - cfg.min_segment) * u01(rng);
      tr.waypoints.push_back({std::min(t, duration), random_point()});
    }
    // Avoid a sliver at the end: fold a too-short last segment into the previous one.
    const std::size_t n = tr.waypoints.size();
    if (n > 2 && tr.waypoints[n - 1].time - tr.waypoints[n - 2].time < 0.5 * cfg.min_segment) {
      tr.waypoints.erase(tr.waypoints.end() - 2);
    }
    tr.validate();
    out.push_back(std::move(tr));
  }
  return out;
}

void CableErrorModel::validate() const {
  if (!sag_gain.allFinite() || !noise_sigma.allFinite() || !static_offset.allFinite() || !backlash.allFinite()) {
    throw std::invalid_argument("cable error model has non-finite entries");
  }
  if ((backlash.array() < 0).any()) throw std::invalid_argument("backlash must be >= 0");
  if ((noise_sigma.array() < 0).any()) throw std::invalid_argument("noise sigma must be >= 0");
}

CableErrorModel CableErrorModel::defaults() {
  CableErrorModel m;
  m.sag_gain << 1.6e-4, 1.6e-4, 0.8, 1.6e-4, 1.6e-4, 0, 0;
  m.backlash << 0.004, 0.004, 0.3, 0.01, 0.01, 0, 0;
  m.noise_sigma << 0.0004, 0.0004, 0.04, 0.002, 0.002, 0, 0;
  m.static_offset << 1.5, -2.0, 1.0;
  return m;
}

std::vector<SimSample> simulate_run(const Trajectory& traj, const SimConfig& cfg, double time_offset) {
  traj.validate();
  cfg.cable.validate();
  if (!(cfg.rate_hz > 0) || cfg.record_every < 1) throw std::invalid_argument("bad simulation rate or cadence");
  const auto& g = cfg.geometry;
  const auto& dyn = cfg.dynamics;
  const auto& cable = cfg.cable;
  const double dt = 1.0 / cfg.rate_hz;
  const auto steps = static_cast<long>(std::floor(traj.duration() * cfg.rate_hz + 1e-9)) + 1;
  const double servo = 1.0 - std::exp(-dt / dyn.servo_time_constant);
  const double filt = 1.0 - std::exp(-dt / dyn.velocity_filter);

  std::mt19937_64 rng(mix_seed(cfg.noise_seed, static_cast<std::uint64_t>(traj.id)));
  std::normal_distribution<double> gauss(0.0, 1.0);

  JointVec qm = traj.sample(0.0).q;
  JointVec qm_prev = qm, qm_dot = JointVec::Zero(), qm_dot_prev = JointVec::Zero(), vel_filt = JointVec::Zero();
  JointVec joint_side = qm;
  std::vector<SimSample> out;
  out.reserve(static_cast<std::size_t>(steps / cfg.record_every + 1));

  for (long k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const JointState des = traj.sample(t);
    JointVec qm_ddot = JointVec::Zero();
    if (k > 0) {
      qm += servo * (des.q - qm);
      qm_dot = (qm - qm_prev) / dt;
      qm_ddot = (qm_dot - qm_dot_prev) / dt;
    }
    vel_filt += filt * (qm_dot - vel_filt);
    // Backlash: the joint side follows the motor only once the dead band is taken up.
    joint_side = joint_side.cwiseMax(qm - cable.backlash).cwiseMin(qm + cable.backlash);

    if (k % cfg.record_every == 0) {
      const Pose rep = forward_kinematics_pose(qm, g);
      const Pose desp = forward_kinematics_pose(des.q, g);
      const Jacobian jac = jacobian_unchecked(qm, g);
      const JointVec tau_g = jac.transpose() * Vec3(0, 0, dyn.tool_weight);
      const JointVec tau_m = tau_g + dyn.damping.cwiseProduct(qm_dot) + dyn.inertia.cwiseProduct(qm_ddot);

      // Cable stretch lets the joint droop along the load the motor holds.
      JointVec q_true = joint_side - cable.sag_gain.cwiseProduct(tau_m);
      for (int j = 0; j < kJoints; ++j) {
        if (cable.noise_sigma(j) > 0) q_true(j) += cable.noise_sigma(j) * gauss(rng);
      }

      SimSample s;
      s.timestamp = time_offset + t;
      s.true_position = fk_unchecked(q_true, g).position + cable.static_offset;
      auto& f = s.state;
      auto put3 = [&f](int at, const Vec3& v) {
        for (int i = 0; i < 3; ++i) f[at + i] = v(i);
      };
      auto put_rot = [&f](int at, const RotMat& r) {
        for (int i = 0; i < 3; ++i) {
          for (int j = 0; j < 3; ++j) f[at + 3 * i + j] = r(i, j);
        }
      };
      auto put7 = [&f](int at, const JointVec& v) {
        for (int i = 0; i < kJoints; ++i) f[at + i] = v(i);
      };
      put3(rs::reported_pos, rep.position);
      put_rot(rs::reported_rot, rep.orientation);
      put3(rs::desired_pos, desp.position);
      put_rot(rs::desired_rot, desp.orientation);
      put7(rs::joints, qm);
      put7(rs::desired_joints, des.q);
      put7(rs::motor_pos, qm.cwiseProduct(dyn.gear_ratio));
      put7(rs::motor_vel, vel_filt.cwiseProduct(dyn.gear_ratio));
      put7(rs::joint_vel, qm_dot);
      put7(rs::desired_joint_vel, des.qd);
      put7(rs::motor_torque, tau_m.cwiseQuotient(dyn.gear_ratio));
      put7(rs::gravity_torque, tau_g);
      f[rs::desired_grasp] = 0.5 * (des.q(5) + des.q(6));
      for (int j = 0; j < kJoints; ++j) {
        f[rs::encoder + j] = std::round(qm(j) * dyn.gear_ratio(j) * dyn.encoder_counts_per_motor_rad);
      }
      put3(rs::cart_vel, jac * qm_dot);
      const RotMat r_next = fk_unchecked(qm + qm_dot * dt, g).orientation;
      const RotMat skew = (r_next * rep.orientation.transpose() - rep.orientation * r_next.transpose()) / (2 * dt);
      put3(rs::cart_ang_vel, Vec3(skew(2, 1), skew(0, 2), skew(1, 0)));
      const Eigen::Matrix3d jjt = jac * jac.transpose();
      const Vec3 force = (jjt + 1e-9 * jjt.trace() * Eigen::Matrix3d::Identity()).ldlt().solve(jac * tau_m);
      put3(rs::cart_force, force);
      put3(rs::cart_moment, (rep.position - g.remote_center).cross(force));
      put7(rs::joint_acc, qm_ddot);
      put7(rs::joint_err, des.q - qm);
      f[rs::run_level] = 1.0;
      f[rs::sublevel] = 0.0;
      f[rs::mode] = 1.0;
      f[rs::padding] = 0.0;
      out.push_back(s);
    }
    qm_prev = qm;
    qm_dot_prev = qm_dot;
  }
  return out;
}

Dataset simulate_dataset(const std::vector<Trajectory>& trajectories, const SimConfig& cfg) {
  std::vector<std::vector<SimSample>> runs;
  std::size_t total = 0;
  double offset = 0.0;
  for (const auto& tr : trajectories) {
    runs.push_back(simulate_run(tr, cfg, offset));
    total += runs.back().size();
    offset += tr.duration() + 1.0 / cfg.rate_hz;
  }
  Dataset ds;
  ds.features.resize(static_cast<Eigen::Index>(total), kFeatureCount);
  ds.labels.resize(static_cast<Eigen::Index>(total), kLabelCount);
  Eigen::Index row = 0;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    for (const auto& s : runs[k]) {
      ds.timestamps.push_back(s.timestamp);
      ds.trajectory.push_back(trajectories[k].id);
      for (int j = 0; j < kFeatureCount; ++j) ds.features(row, j) = s.state[j];
      const Vec3 e = s.error();
      for (int j = 0; j < kLabelCount; ++j) ds.labels(row, j) = e(j);
      ++row;
    }
  }
  ds.validate();
  return ds;
}

double workspace_coverage(const Dataset& ds, const JointWorkspace& ws, int cells) {
  if (cells < 1) throw std::invalid_argument("grid needs at least one cell per axis");
  std::vector<char> seen(static_cast<std::size_t>(cells) * cells * cells, 0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    int idx[3];
    bool inside = true;
    for (int a = 0; a < 3; ++a) {
      const double v = ds.features(static_cast<Eigen::Index>(i), rs::desired_joints + a);
      const double u = (v - ws.lo(a)) / (ws.hi(a) - ws.lo(a));
      if (u < 0 || u > 1) inside = false;
      idx[a] = std::min(cells - 1, static_cast<int>(u * cells));
    }
    if (inside) seen[(static_cast<std::size_t>(idx[0]) * cells + idx[1]) * cells + idx[2]] = 1;
  }
  return static_cast<double>(std::count(seen.begin(), seen.end(), 1)) / static_cast<double>(seen.size());
}

}  // namespace eep
