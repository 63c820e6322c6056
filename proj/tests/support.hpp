#pragma once

#include "eep/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <vector>

namespace eep::testing {

inline double uniform(std::mt19937& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

inline Vec3 random_vec(std::mt19937& rng, double lo, double hi) {
  return {uniform(rng, lo, hi), uniform(rng, lo, hi), uniform(rng, lo, hi)};
}

inline Vec3 random_direction(std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v{n(rng), n(rng), n(rng)};
  while (v.norm() < 1e-6) v = {n(rng), n(rng), n(rng)};
  return v.normalized();
}

// Rotation from a random unit quaternion.
inline RotMat random_rotation(std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("eep_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Midpoint of the closest points of two lines: coarse grid over the line
// parameters, then alternating exact projections until the pair settles.
inline Vec3 closest_midpoint_oracle(const Vec3& o1, const Vec3& d1, const Vec3& o2, const Vec3& d2,
                                    double span = 2000.0) {
  const Vec3 u = d1.normalized(), v = d2.normalized();
  double best_s = 0, best_t = 0, best = std::numeric_limits<double>::infinity();
  for (int i = -50; i <= 50; ++i) {
    for (int j = -50; j <= 50; ++j) {
      const double s = span * i / 50.0, t = span * j / 50.0;
      const double dist = (o1 + s * u - o2 - t * v).squaredNorm();
      if (dist < best) {
        best = dist;
        best_s = s;
        best_t = t;
      }
    }
  }
  double s = best_s, t = best_t;
  for (int it = 0; it < 200000; ++it) {
    const double s_new = (o2 + t * v - o1).dot(u);
    const double t_new = (o1 + s_new * u - o2).dot(v);
    const bool settled = std::abs(s_new - s) < 1e-13 && std::abs(t_new - t) < 1e-13;
    s = s_new;
    t = t_new;
    if (settled) break;
  }
  return 0.5 * ((o1 + s * u) + (o2 + t * v));
}

}  // namespace eep::testing
