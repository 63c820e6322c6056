#include "eep/tracking.hpp"

#include "eep/text_table.hpp"

#include <cmath>
#include <limits>

namespace eep {

std::string_view status_name(TrackStatus s) {
  return s == TrackStatus::effective ? "effective" : "suspended";
}

void TrackerConfig::validate() const {
  if (!(motion_threshold > 0 && radius_window > 0 && d_min_factor > 0 && consistency_threshold > 0 &&
        tolerance_growth > 0 && global_r_min > 0 && global_r_max > global_r_min && global_d_min > 0)) {
    throw std::invalid_argument("tracker thresholds must be positive");
  }
  if (reinstate_frames < 1) throw std::invalid_argument("reinstate_frames must be >= 1");
  if (restart_skip < 0) throw std::invalid_argument("restart_skip must be >= 0");
}

CircleTrack update_track(const CircleTrack& track, const TrackUpdate& update, const TrackerConfig& cfg) {
  CircleTrack out = track;
  const bool detected = update.detection.has_value();

  if (track.status == TrackStatus::effective) {
    const bool moved = detected && track.last_center &&
                       (update.detection->center - *track.last_center).norm() > cfg.motion_threshold;
    if (!detected || !update.color_ok || moved) {
      out.status = TrackStatus::suspended;
      out.consecutive_good_frames = 0;
    } else {
      ++out.consecutive_good_frames;
    }
  } else {
    const bool consistent = update.consistency_mm && *update.consistency_mm <= cfg.consistency_threshold;
    if (detected && update.color_ok && consistent) {
      ++out.consecutive_good_frames;
      if (out.consecutive_good_frames > cfg.reinstate_frames) out.status = TrackStatus::effective;
    } else {
      out.consecutive_good_frames = 0;
    }
  }

  if (detected) {
    out.last_center = update.detection->center;
    out.last_radius = update.detection->radius;
  }
  return out;
}

SearchBounds bound_search_params(const SearchHistory& history, const TrackerConfig& cfg) {
  if (!history.last_radius) return {cfg.global_d_min, cfg.global_r_min, cfg.global_r_max};
  const double window = cfg.radius_window * std::pow(cfg.tolerance_growth, history.widening);
  const double r = *history.last_radius;
  SearchBounds b;
  b.r_min = std::max(1.0, r * (1.0 - window));
  b.r_max = r * (1.0 + window);
  double closest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < history.last_centers.size(); ++i) {
    for (std::size_t j = i + 1; j < history.last_centers.size(); ++j) {
      closest = std::min(closest, (history.last_centers[i] - history.last_centers[j]).norm());
    }
  }
  b.d_min = std::isfinite(closest) && closest > 0 ? cfg.d_min_factor * closest : cfg.global_d_min;
  return b;
}

Vec3 triangulate_pair(const Ray& a, const Ray& b) {
  const Vec3& d1 = a.direction();
  const Vec3& d2 = b.direction();
  const Vec3 w0 = a.origin() - b.origin();
  const double c = d1.dot(d2);
  const double sin2 = 1.0 - c * c;
  if (std::sqrt(std::max(0.0, sin2)) <= 1e-6) throw DegenerateRays("rays are parallel or nearly so");
  const double d = d1.dot(w0);
  const double e = d2.dot(w0);
  const double s = (c * e - d) / sin2;
  const double t = (e - c * d) / sin2;
  return 0.5 * (a.at(s) + b.at(t));
}

BallEstimate triangulate_ball(BallColor color, const std::vector<EffectiveCircle>& circles,
                              const std::map<int, CameraModel>& cams, const TrackerConfig& cfg,
                              TriangulationMode mode) {
  if (circles.size() < 2) {
    throw LocalizationUnavailable(std::string(color_name(color)) + " ball has fewer than 2 effective circles",
                                  cfg.restart_skip);
  }
  std::vector<Ray> rays;
  BallEstimate out;
  out.color = color;
  for (const auto& c : circles) {
    rays.push_back(cams.at(c.camera_id).backproject(c.center));
    out.contributing_cameras.insert(c.camera_id);
  }

  if (mode == TriangulationMode::least_squares) {
    Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
    Vec3 rhs = Vec3::Zero();
    for (const auto& r : rays) {
      const Eigen::Matrix3d p = Eigen::Matrix3d::Identity() - r.direction() * r.direction().transpose();
      a += p;
      rhs += p * r.origin();
    }
    out.center_w = a.ldlt().solve(rhs);
    out.pair_count = static_cast<int>(rays.size() * (rays.size() - 1) / 2);
    return out;
  }

  Vec3 sum = Vec3::Zero();
  for (std::size_t i = 0; i < rays.size(); ++i) {
    for (std::size_t j = i + 1; j < rays.size(); ++j) {
      try {
        sum += triangulate_pair(rays[i], rays[j]);
        ++out.pair_count;
      } catch (const DegenerateRays&) {
      }
    }
  }
  if (out.pair_count == 0) {
    throw LocalizationUnavailable(std::string(color_name(color)) + " ball rays are all parallel", cfg.restart_skip);
  }
  out.center_w = sum / out.pair_count;
  return out;
}

FrameTracker::FrameTracker(std::map<int, CameraModel> cams, TrackerConfig cfg)
    : cams_(std::move(cams)), cfg_(cfg) {
  cfg_.validate();
}

SearchBounds FrameTracker::next_bounds(int camera_id, BallColor color) const {
  const auto it = history_.find({camera_id, color});
  return bound_search_params(it == history_.end() ? SearchHistory{} : it->second, cfg_);
}

FrameTracker::FrameResult FrameTracker::process(const std::vector<FrameInput>& inputs) {
  FrameResult result;
  if (skip_remaining_ > 0) {
    --skip_remaining_;
    result.skipped = true;
    for (const auto& [key, t] : tracks_) result.tracks.push_back(t);
    return result;
  }

  auto track_for = [&](const FrameInput& in) -> CircleTrack& {
    auto [it, inserted] = tracks_.try_emplace({in.camera_id, in.color});
    if (inserted) {
      it->second.camera_id = in.camera_id;
      it->second.color = in.color;
    }
    return it->second;
  };

  // Effective circles first: their conditions do not involve the 3D reconstruction.
  std::map<std::pair<int, BallColor>, bool> was_suspended;
  for (const auto& in : inputs) {
    CircleTrack& t = track_for(in);
    was_suspended[{in.camera_id, in.color}] = t.status == TrackStatus::suspended;
    if (t.status == TrackStatus::effective) t = update_track(t, {in.detection, in.color_ok, std::nullopt}, cfg_);
  }

  bool lost = false;
  for (const auto color : kBallColors) {
    std::vector<EffectiveCircle> eff;
    for (const auto& in : inputs) {
      if (in.color != color || !in.detection) continue;
      if (tracks_.at({in.camera_id, color}).status == TrackStatus::effective) {
        eff.push_back({in.camera_id, in.detection->center});
      }
    }
    try {
      result.balls[color] = triangulate_ball(color, eff, cams_, cfg_);
    } catch (const LocalizationUnavailable&) {
      lost = true;
    }
  }

  for (const auto& in : inputs) {
    if (!was_suspended[{in.camera_id, in.color}]) continue;
    std::optional<double> consistency;
    const auto ball = result.balls.find(in.color);
    if (in.detection && ball != result.balls.end()) {
      consistency = cams_.at(in.camera_id).backproject(in.detection->center).distance_to(ball->second.center_w);
    }
    CircleTrack& t = tracks_.at({in.camera_id, in.color});
    t = update_track(t, {in.detection, in.color_ok, consistency}, cfg_);
  }

  // Search history: radius per track, all centers per camera.
  std::map<int, std::vector<Vec2>> centers_by_camera;
  for (const auto& in : inputs) {
    if (in.detection) centers_by_camera[in.camera_id].push_back(in.detection->center);
  }
  for (const auto& in : inputs) {
    SearchHistory& h = history_[{in.camera_id, in.color}];
    if (in.detection) h.last_radius = in.detection->radius;
    h.last_centers = centers_by_camera[in.camera_id];
    if (lost) {
      h.widening += 1.0;
    } else {
      h.widening = std::max(0.0, h.widening - 1.0);
    }
  }

  if (lost) {
    // Restart: skip a few frames and re-initialize every circle as effective.
    ++restarts_;
    skip_remaining_ = cfg_.restart_skip;
    for (auto& [key, t] : tracks_) {
      t.status = TrackStatus::effective;
      t.consecutive_good_frames = 0;
      t.last_center.reset();
    }
  }
  for (const auto& [key, t] : tracks_) result.tracks.push_back(t);
  return result;
}

void write_track_log(const std::filesystem::path& path, const std::vector<TrackLogRow>& rows) {
  TextTable t;
  t.header = {"frame", "camera", "color", "status", "u", "v", "r"};
  for (const auto& row : rows) {
    const bool has = row.detection.has_value();
    t.rows.push_back({std::to_string(row.frame), std::to_string(row.track.camera_id),
                      std::string(color_name(row.track.color)), std::string(status_name(row.track.status)),
                      has ? format_double(row.detection->center.x()) : "nan",
                      has ? format_double(row.detection->center.y()) : "nan",
                      has ? format_double(row.detection->radius) : "nan"});
  }
  write_table(path, t, {"per-frame circle status; u, v, r in px (nan when nothing was detected)"});
}

void write_ball_estimates(const std::filesystem::path& path, const std::vector<BallEstimateRow>& rows) {
  TextTable t;
  t.header = {"frame", "color", "x", "y", "z", "pair_count"};
  for (const auto& row : rows) {
    t.rows.push_back({std::to_string(row.frame), std::string(color_name(row.ball.color)),
                      format_double(row.ball.center_w.x()), format_double(row.ball.center_w.y()),
                      format_double(row.ball.center_w.z()), std::to_string(row.ball.pair_count)});
  }
  write_table(path, t, {"triangulated ball centers, world mm"});
}

}  // namespace eep
