#include "eep/evaluation.hpp"

#include "eep/text_table.hpp"

#include <cmath>

namespace eep {

ErrorReport compute_report(std::span<const Vec3> errors, std::string source) {
  if (errors.size() < 2) throw std::invalid_argument("an error report needs at least two samples");
  ErrorReport r;
  r.source = std::move(source);
  r.count = errors.size();
  const double n = static_cast<double>(errors.size());
  Vec3 sum = Vec3::Zero(), sq = Vec3::Zero();
  double norm_sum = 0.0, norm_sq = 0.0;
  for (const auto& e : errors) {
    sum += e;
    sq += e.cwiseAbs2();
    const double m = e.norm();
    norm_sum += m;
    norm_sq += m * m;
  }
  r.mean = sum / n;
  r.rms = (sq / n).cwiseSqrt();
  Vec3 var = Vec3::Zero();
  double norm_var = 0.0;
  r.mean_norm = norm_sum / n;
  for (const auto& e : errors) {
    var += (e - r.mean).cwiseAbs2();
    norm_var += (e.norm() - r.mean_norm) * (e.norm() - r.mean_norm);
  }
  r.sd = (var / n).cwiseSqrt();
  r.rms_3d = std::sqrt(norm_sq / n);
  r.sd_norm = std::sqrt(norm_var / n);
  r.sd_signed = std::sqrt((var / n).sum());
  return r;
}

Improvement improvement_summary(const ErrorReport& before, const ErrorReport& after) {
  if (before.count != after.count) throw std::invalid_argument("reports cover different sample counts");
  if (!(before.rms_3d > 0) || !(before.sd_signed > 0) || !(before.sd_norm > 0)) {
    throw UndefinedImprovement("improvement is undefined for a zero baseline");
  }
  return {100.0 * (1.0 - after.rms_3d / before.rms_3d), 100.0 * (1.0 - after.sd_signed / before.sd_signed),
          100.0 * (1.0 - after.sd_norm / before.sd_norm)};
}

void write_reports(const std::filesystem::path& path, const std::vector<ErrorReport>& reports) {
  TextTable t;
  t.header = {"source", "n",    "rms_x",        "rms_y",      "rms_z",  "rms_3d", "sd_x",
              "sd_y",   "sd_z", "sd_3d_signed", "sd_3d_norm", "mean_x", "mean_y", "mean_z"};
  for (const auto& r : reports) {
    t.rows.push_back({r.source, std::to_string(r.count), format_double(r.rms.x()), format_double(r.rms.y()),
                      format_double(r.rms.z()), format_double(r.rms_3d), format_double(r.sd.x()),
                      format_double(r.sd.y()), format_double(r.sd.z()), format_double(r.sd_signed),
                      format_double(r.sd_norm), format_double(r.mean.x()), format_double(r.mean.y()),
                      format_double(r.mean.z())});
  }
  write_table(path, t,
              {"position error statistics, mm; SD uses the population (divide by n) convention",
               "sd_3d_signed = sqrt(sd_x^2 + sd_y^2 + sd_z^2); sd_3d_norm = SD of the error magnitudes"});
}

void write_plot_data(const std::filesystem::path& path, const std::vector<TracePoint>& points) {
  TextTable t;
  t.header = {"time",       "true_x",     "true_y",      "true_z",      "reported_x",
              "reported_y", "reported_z", "corrected_x", "corrected_y", "corrected_z"};
  for (const auto& p : points) {
    std::vector<std::string> row{format_double(p.time)};
    for (const Vec3* v : {&p.truth, &p.reported, &p.corrected}) {
      for (int i = 0; i < 3; ++i) row.push_back(format_double((*v)(i)));
    }
    t.rows.push_back(std::move(row));
  }
  write_table(path, t, {"end-effector traces, s and mm"});
}

}  // namespace eep
