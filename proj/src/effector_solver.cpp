#include "eep/effector_solver.hpp"

#include "eep/text_table.hpp"

namespace eep {

RigCenters rig_forward(const Pose& pose, const MarkerRigSpec& rig) {
  return {pose.to_world({rig.d, 0, 0}), pose.to_world({0, rig.d, 0}), pose.to_world({-rig.d, 0, 0})};
}

RigCenters rig_forward(const EffectorPose& pose, const MarkerRigSpec& rig) {
  return rig_forward(pose.pose(), rig);
}

double rig_cost(const Pose& pose, const MarkerRigSpec& rig, const RigCenters& observed) {
  const RigCenters p = rig_forward(pose, rig);
  return (observed.green - p.green).squaredNorm() + (observed.yellow - p.yellow).squaredNorm() +
         (observed.red - p.red).squaredNorm();
}

EffectorPose initial_guess(const RigCenters& observed) {
  const Vec3 origin = 0.5 * (observed.green + observed.red);
  const Vec3 to_green = observed.green - origin;
  const Vec3 to_yellow = observed.yellow - origin;
  if (to_green.norm() < 1e-9) throw DegenerateGeometry("green and red centers coincide");
  const Vec3 x = to_green.normalized();
  const Vec3 y_raw = to_yellow - to_yellow.dot(x) * x;
  if (y_raw.norm() < 1e-6 * std::max(1.0, to_yellow.norm())) {
    throw DegenerateGeometry("ball centers are collinear");
  }
  const Vec3 y = y_raw.normalized();
  RotMat r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = x.cross(y);
  return {origin, rotmat_to_euler(r).angles, 0.0};
}

NMConfig default_effector_nm_config() {
  NMConfig cfg;
  cfg.initial_step.resize(6);
  cfg.initial_step << 1.0, 1.0, 1.0, 0.02, 0.02, 0.02;
  cfg.simplex_tolerance = 1e-11;
  cfg.max_iterations = 20000;
  return cfg;
}

EffectorPose solve_effector_pose(const RigCenters& observed, const MarkerRigSpec& rig, const NMConfig& cfg) {
  const EffectorPose guess = initial_guess(observed);
  Eigen::VectorXd x0(6);
  x0 << guess.position, guess.orientation.alpha, guess.orientation.beta, guess.orientation.gamma;
  const ObjectiveFn cost = [&](const Eigen::VectorXd& x) { return rig_cost(vector_to_pose(Vec6(x)), rig, observed); };
  const OptResult res = nelder_mead(cost, x0, cfg);

  EffectorPose out;
  out.position = res.solution.head<3>();
  out.orientation = {wrap_angle(res.solution(3)), wrap_angle(res.solution(4)), wrap_angle(res.solution(5))};
  out.residual_cost = res.final_objective;
  if (!res.converged) throw EffectorSolveError("Nelder-Mead did not converge on the end-effector pose", out);
  return out;
}

void write_ground_truth(const std::filesystem::path& path, const std::vector<GroundTruthSample>& samples) {
  TextTable t;
  t.header = {"timestamp", "x", "y", "z", "alpha", "beta", "gamma", "residual_cost"};
  for (const auto& s : samples) {
    const auto& p = s.pose;
    t.rows.push_back({format_double(s.timestamp), format_double(p.position.x()), format_double(p.position.y()),
                      format_double(p.position.z()), format_double(p.orientation.alpha),
                      format_double(p.orientation.beta), format_double(p.orientation.gamma),
                      format_double(p.residual_cost)});
  }
  write_table(path, t, {"end-effector ground truth: position mm, Euler angles rad, residual cost mm^2"});
}

std::vector<GroundTruthSample> read_ground_truth(const std::filesystem::path& path) {
  const TextTable t = read_table(path);
  std::vector<GroundTruthSample> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    GroundTruthSample s;
    s.timestamp = t.number(i, "timestamp");
    s.pose.position = {t.number(i, "x"), t.number(i, "y"), t.number(i, "z")};
    s.pose.orientation = {t.number(i, "alpha"), t.number(i, "beta"), t.number(i, "gamma")};
    s.pose.residual_cost = t.number(i, "residual_cost");
    out.push_back(s);
  }
  return out;
}

}  // namespace eep
