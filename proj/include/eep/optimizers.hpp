#pragma once

// Levenberg-Marquardt least squares and Nelder-Mead simplex minimization.

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <vector>

namespace eep {

class OptimizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;
using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;

struct LMConfig {
  int max_iterations = 200;
  /// Convergence on the infinity norm of J^T r, or on ||r|| itself.
  double residual_tolerance = 1e-12;
  /// Convergence on the accepted step, relative to ||x||.
  double step_tolerance = 1e-12;
  double initial_damping = 1e-3;
  double damping_up = 10.0;
  double damping_down = 10.0;

  void validate() const;
};

struct NMConfig {
  int max_iterations = 20000;
  /// Converged when both the simplex diameter and the objective spread fall below this.
  double simplex_tolerance = 1e-10;
  /// One entry per parameter; empty means 5% of |x0_i| (0.00025 for zeros).
  Eigen::VectorXd initial_step;
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;

  void validate() const;
};

struct OptResult {
  Eigen::VectorXd solution;
  double final_objective = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Best objective after each iteration (index 0 is the starting point).
  std::vector<double> trace;
};

/// Forward-difference Jacobian with step max(1e-7, 1e-7 |x_i|).
Eigen::MatrixXd finite_difference_jacobian(const ResidualFn& residual, const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& r0);

/// Minimizes 0.5 ||r(x)||^2. The reported objective is ||r||^2. A residual that throws
/// or is non-finite during the search counts as a rejected step.
OptResult levenberg_marquardt(const ResidualFn& residual, const Eigen::VectorXd& x0, const LMConfig& cfg,
                              const JacobianFn& jacobian = {});

OptResult nelder_mead(const ObjectiveFn& objective, const Eigen::VectorXd& x0, const NMConfig& cfg);

}  // namespace eep
