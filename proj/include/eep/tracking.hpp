#pragma once

// Frame update: per-camera circle status (effective / suspended), Hough search
// bounds from recent frames, and ball triangulation from effective circles.

#include "eep/geometry.hpp"
#include "eep/image_pipeline.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

namespace eep {

enum class TrackStatus { effective, suspended };

std::string_view status_name(TrackStatus s);

struct TrackerConfig {
  double motion_threshold = 25.0;     // px per frame
  int reinstate_frames = 5;           // good frames must exceed this count
  double radius_window = 0.3;         // r_min / r_max = r * (1 -/+ window)
  double d_min_factor = 0.5;          // fraction of the closest center pair
  double consistency_threshold = 10.0;  // mm, ray to reconstructed center
  int restart_skip = 3;               // frames skipped before a restart
  double tolerance_growth = 1.5;      // window multiplier per restart
  // Cold-start bounds.
  double global_r_min = 6.0;
  double global_r_max = 40.0;
  double global_d_min = 20.0;

  void validate() const;
};

struct CircleTrack {
  int camera_id = 0;
  BallColor color = BallColor::red;
  TrackStatus status = TrackStatus::effective;
  std::optional<Vec2> last_center;
  double last_radius = 0.0;
  int consecutive_good_frames = 0;
};

/// One frame's evidence for a track.
struct TrackUpdate {
  std::optional<DetectedCircle> detection;  // absent: nothing even at the largest blur
  bool color_ok = false;
  std::optional<double> consistency_mm;  // ray-to-center distance, when a center is available
};

CircleTrack update_track(const CircleTrack& track, const TrackUpdate& update, const TrackerConfig& cfg);

/// Recent detection history of one camera, used to bound the Hough search.
struct SearchHistory {
  std::optional<double> last_radius;
  std::vector<Vec2> last_centers;  // all circles seen by the camera in the previous frame
  double widening = 0.0;           // exponent of tolerance_growth
};

struct SearchBounds {
  double d_min = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;
};

SearchBounds bound_search_params(const SearchHistory& history, const TrackerConfig& cfg);

class DegenerateRays : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Midpoint of the common perpendicular of two lines.
Vec3 triangulate_pair(const Ray& a, const Ray& b);

struct BallEstimate {
  BallColor color = BallColor::red;
  Vec3 center_w;
  std::set<int> contributing_cameras;
  int pair_count = 0;
};

struct EffectiveCircle {
  int camera_id = 0;
  Vec2 center;
};

/// Raised with fewer than two effective circles; the caller skips frames and widens bounds.
class LocalizationUnavailable : public std::runtime_error {
 public:
  LocalizationUnavailable(const std::string& what, int skip_frames)
      : std::runtime_error(what), restart_skip(skip_frames) {}
  int restart_skip;
};

enum class TriangulationMode { pairwise_mean, least_squares };

/// Mean of the pairwise midpoints over all camera pairs (or the n-view least-squares point).
BallEstimate triangulate_ball(BallColor color, const std::vector<EffectiveCircle>& circles,
                              const std::map<int, CameraModel>& cams, const TrackerConfig& cfg = {},
                              TriangulationMode mode = TriangulationMode::pairwise_mean);

/// Frame-by-frame driver owning the track state of every (camera, color).
class FrameTracker {
 public:
  FrameTracker(std::map<int, CameraModel> cams, TrackerConfig cfg);

  struct FrameInput {
    int camera_id = 0;
    BallColor color = BallColor::red;
    std::optional<DetectedCircle> detection;
    bool color_ok = false;
  };

  struct FrameResult {
    std::map<BallColor, BallEstimate> balls;
    std::vector<CircleTrack> tracks;  // state after this frame
    bool skipped = false;             // frame dropped during a restart
  };

  FrameResult process(const std::vector<FrameInput>& inputs);

  /// Search bounds to use for the next frame of a camera.
  [[nodiscard]] SearchBounds next_bounds(int camera_id, BallColor color) const;
  [[nodiscard]] int restarts() const { return restarts_; }

 private:
  std::map<int, CameraModel> cams_;
  TrackerConfig cfg_;
  std::map<std::pair<int, BallColor>, CircleTrack> tracks_;
  std::map<std::pair<int, BallColor>, SearchHistory> history_;
  int skip_remaining_ = 0;
  int restarts_ = 0;
};

struct TrackLogRow {
  int frame = 0;
  CircleTrack track;
  std::optional<DetectedCircle> detection;
};

/// Rows: frame, camera, color, status, u, v, r.
void write_track_log(const std::filesystem::path& path, const std::vector<TrackLogRow>& rows);

struct BallEstimateRow {
  int frame = 0;
  BallEstimate ball;
};

/// Rows: frame, color, x, y, z, pair_count.
void write_ball_estimates(const std::filesystem::path& path, const std::vector<BallEstimateRow>& rows);

}  // namespace eep
