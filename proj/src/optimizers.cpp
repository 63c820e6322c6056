#include "eep/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace eep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

// Residual evaluation used inside the search: failures become +inf cost.
double safe_cost(const ResidualFn& residual, const Eigen::VectorXd& x, Eigen::VectorXd& r_out) {
  try {
    r_out = residual(x);
  } catch (const std::exception&) {
    return kInf;
  }
  if (!all_finite(r_out)) return kInf;
  return r_out.squaredNorm();
}

double safe_objective(const ObjectiveFn& f, const Eigen::VectorXd& x) {
  double v = kInf;
  try {
    v = f(x);
  } catch (const std::exception&) {
    return kInf;
  }
  return std::isfinite(v) ? v : kInf;
}

}  // namespace

void LMConfig::validate() const {
  if (max_iterations < 1) throw OptimizationError("LM max_iterations must be >= 1");
  if (!(residual_tolerance > 0 && step_tolerance > 0 && initial_damping > 0 && damping_up > 0 &&
        damping_down > 0)) {
    throw OptimizationError("LM tolerances and damping factors must be positive");
  }
}

void NMConfig::validate() const {
  if (max_iterations < 1) throw OptimizationError("NM max_iterations must be >= 1");
  if (!(simplex_tolerance > 0)) throw OptimizationError("NM simplex_tolerance must be positive");
  if (!(reflection > 0 && expansion > 1 && contraction > 0 && contraction < 1 && shrink > 0 && shrink < 1)) {
    throw OptimizationError("NM coefficients outside valid ranges");
  }
}

Eigen::MatrixXd finite_difference_jacobian(const ResidualFn& residual, const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& r0) {
  Eigen::MatrixXd j(r0.size(), x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = std::max(1e-7, 1e-7 * std::abs(x(i)));
    xp(i) = x(i) + h;
    j.col(i) = (residual(xp) - r0) / h;
    xp(i) = x(i);
  }
  return j;
}

OptResult levenberg_marquardt(const ResidualFn& residual, const Eigen::VectorXd& x0, const LMConfig& cfg,
                              const JacobianFn& jacobian) {
  cfg.validate();
  Eigen::VectorXd r = residual(x0);
  if (!all_finite(r)) throw OptimizationError("non-finite residual at the initial point");
  if (r.size() < x0.size()) throw OptimizationError("LM needs at least as many residuals as parameters");

  OptResult out;
  out.solution = x0;
  double cost = r.squaredNorm();
  out.trace.push_back(cost);

  auto jac = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& rx) {
    return jacobian ? jacobian(x) : finite_difference_jacobian(residual, x, rx);
  };

  Eigen::VectorXd x = x0;
  Eigen::MatrixXd j = jac(x, r);
  Eigen::MatrixXd jtj = j.transpose() * j;
  Eigen::VectorXd g = j.transpose() * r;
  double lambda = cfg.initial_damping;
  Eigen::VectorXd r_trial;

  for (int it = 0; it < cfg.max_iterations; ++it) {
    if (std::sqrt(cost) <= cfg.residual_tolerance || g.lpNorm<Eigen::Infinity>() <= cfg.residual_tolerance) {
      out.converged = true;
      break;
    }
    out.iterations = it + 1;

    Eigen::MatrixXd a = jtj;
    const double floor = 1e-12 * std::max(1.0, jtj.diagonal().maxCoeff());
    for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, i) += lambda * std::max(jtj(i, i), floor);
    const Eigen::VectorXd step = a.ldlt().solve(-g);

    const Eigen::VectorXd x_trial = x + step;
    const double trial_cost = all_finite(step) ? safe_cost(residual, x_trial, r_trial) : kInf;
    const bool tiny_step = step.norm() <= cfg.step_tolerance * (x.norm() + cfg.step_tolerance);

    if (trial_cost < cost) {
      x = x_trial;
      r = r_trial;
      cost = trial_cost;
      lambda = std::max(lambda / cfg.damping_down, 1e-15);
      out.trace.push_back(cost);
      if (tiny_step) {
        out.converged = true;
        break;
      }
      j = jac(x, r);
      jtj = j.transpose() * j;
      g = j.transpose() * r;
    } else {
      out.trace.push_back(cost);
      if (tiny_step) {
        out.converged = true;
        break;
      }
      lambda *= cfg.damping_up;
      if (lambda > 1e20) break;
    }
  }
  out.solution = x;
  out.final_objective = cost;
  return out;
}

OptResult nelder_mead(const ObjectiveFn& objective, const Eigen::VectorXd& x0, const NMConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = x0.size();
  if (n < 1) throw OptimizationError("NM needs at least one parameter");
  if (cfg.initial_step.size() != 0 && cfg.initial_step.size() != n) {
    throw OptimizationError("NM initial_step length does not match the parameter count");
  }

  std::vector<Eigen::VectorXd> simplex(n + 1, x0);
  for (Eigen::Index i = 0; i < n; ++i) {
    double step = cfg.initial_step.size() ? cfg.initial_step(i) : 0.05 * std::abs(x0(i));
    if (step == 0.0) step = 0.00025;
    simplex[i + 1](i) += step;
  }
  std::vector<double> f(n + 1);
  for (Eigen::Index i = 0; i <= n; ++i) {
    f[i] = objective(simplex[i]);
    if (!std::isfinite(f[i])) throw OptimizationError("non-finite objective on the initial simplex");
  }

  OptResult out;
  std::vector<std::size_t> order(n + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return f[a] < f[b]; });
    std::vector<Eigen::VectorXd> s2;
    std::vector<double> f2;
    for (auto i : order) {
      s2.push_back(simplex[i]);
      f2.push_back(f[i]);
    }
    simplex = std::move(s2);
    f = std::move(f2);
  };
  sort_simplex();
  out.trace.push_back(f[0]);

  for (int it = 0; it < cfg.max_iterations; ++it) {
    double diameter = 0.0;
    double spread = 0.0;
    for (Eigen::Index i = 1; i <= n; ++i) {
      diameter = std::max(diameter, (simplex[i] - simplex[0]).lpNorm<Eigen::Infinity>());
      spread = std::max(spread, std::abs(f[i] - f[0]));
    }
    if (diameter <= cfg.simplex_tolerance && spread <= cfg.simplex_tolerance) {
      out.converged = true;
      break;
    }
    out.iterations = it + 1;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) centroid += simplex[i];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd& worst = simplex[n];
    const Eigen::VectorXd xr = centroid + cfg.reflection * (centroid - worst);
    const double fr = safe_objective(objective, xr);
    bool do_shrink = false;

    if (fr < f[0]) {
      const Eigen::VectorXd xe = centroid + cfg.expansion * (xr - centroid);
      const double fe = safe_objective(objective, xe);
      if (fe < fr) {
        simplex[n] = xe;
        f[n] = fe;
      } else {
        simplex[n] = xr;
        f[n] = fr;
      }
    } else if (fr < f[n - 1]) {
      simplex[n] = xr;
      f[n] = fr;
    } else if (fr < f[n]) {
      const Eigen::VectorXd xc = centroid + cfg.contraction * (xr - centroid);
      const double fc = safe_objective(objective, xc);
      if (fc <= fr) {
        simplex[n] = xc;
        f[n] = fc;
      } else {
        do_shrink = true;
      }
    } else {
      const Eigen::VectorXd xcc = centroid - cfg.contraction * (centroid - worst);
      const double fcc = safe_objective(objective, xcc);
      if (fcc < f[n]) {
        simplex[n] = xcc;
        f[n] = fcc;
      } else {
        do_shrink = true;
      }
    }

    if (do_shrink) {
      for (Eigen::Index i = 1; i <= n; ++i) {
        simplex[i] = simplex[0] + cfg.shrink * (simplex[i] - simplex[0]);
        f[i] = safe_objective(objective, simplex[i]);
      }
    }
    sort_simplex();
    out.trace.push_back(f[0]);
  }

  out.solution = simplex[0];
  out.final_objective = f[0];
  return out;
}

}  // namespace eep
