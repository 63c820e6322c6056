#pragma once

// Position-error statistics (RMS and standard deviation, population convention).

#include "eep/geometry.hpp"

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace eep {

struct ErrorReport {
  std::string source;  // reported | corrected | measurement | ...
  std::size_t count = 0;
  Vec3 mean = Vec3::Zero();
  Vec3 rms = Vec3::Zero();
  Vec3 sd = Vec3::Zero();
  double rms_3d = 0.0;     // sqrt(mean |e|^2)
  double mean_norm = 0.0;  // mean |e|
  double sd_norm = 0.0;    // SD of |e|
  double sd_signed = 0.0;  // sqrt(sd_x^2 + sd_y^2 + sd_z^2), used for thresholds
};

/// Needs at least two errors.
ErrorReport compute_report(std::span<const Vec3> errors, std::string source);

class UndefinedImprovement : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Improvement {
  double rms_reduction_pct = 0.0;
  double sd_reduction_pct = 0.0;       // on sd_signed
  double sd_norm_reduction_pct = 0.0;  // on sd_norm
};

/// 100 * (1 - after / before). Sample counts must match.
Improvement improvement_summary(const ErrorReport& before, const ErrorReport& after);

/// Rows: source, n, rms_x, rms_y, rms_z, rms_3d, sd_x, sd_y, sd_z, sd_3d_signed, sd_3d_norm, mean_x, mean_y, mean_z.
void write_reports(const std::filesystem::path& path, const std::vector<ErrorReport>& reports);

struct TracePoint {
  double time = 0.0;
  Vec3 truth;
  Vec3 reported;
  Vec3 corrected;
};

/// Rows: time, true_x, true_y, true_z, reported_x, ..., corrected_z.
void write_plot_data(const std::filesystem::path& path, const std::vector<TracePoint>& points);

}  // namespace eep
