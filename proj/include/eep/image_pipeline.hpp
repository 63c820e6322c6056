#pragma once

// Synthetic ball-rig rendering and colored circle detection:
// gray -> blur -> Canny, masked by a blurred and binarized color channel,
// then gradient-voting Hough circles with an auto-tuned accumulator threshold
// and a color check along the circle border.

#include "eep/geometry.hpp"
#include "eep/raster_image.hpp"

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace eep {

enum class BallColor { red = 0, green = 1, yellow = 2 };
inline constexpr std::array<BallColor, 3> kBallColors{BallColor::red, BallColor::green, BallColor::yellow};

std::string_view color_name(BallColor c);
BallColor parse_color(std::string_view name);

/// Flat-shaded render color of each ball.
Rgb render_color(BallColor c);

/// Hue/saturation/value gate. Hue in degrees; red wraps around zero.
struct ColorGate {
  double hue_center = 0.0;
  double hue_half_width = 20.0;
  double min_saturation = 0.4;
  double min_value = 0.15;

  [[nodiscard]] bool accepts(Rgb px) const;
};

ColorGate default_gate(BallColor c);

struct HoughParams {
  double dp = 1.0;          // inverse accumulator resolution
  double para1 = 100.0;     // high Canny threshold; low is para1 / 2
  double para2 = 30.0;      // accumulator threshold
  double d_min = 20.0;      // px, minimum distance between centers
  double r_min = 6.0;       // px
  double r_max = 40.0;      // px
  double blur_sigma = 1.5;  // px, edge-path Gaussian blur

  void validate() const;
};

struct DetectedCircle {
  Vec2 center;
  double radius = 0.0;
  BallColor color = BallColor::red;
  double accumulator_score = 0.0;
};

/// Output of the preprocessing chain for one target color.
struct EdgeMap {
  int width = 0;
  int height = 0;
  BallColor color = BallColor::red;
  std::vector<std::uint8_t> edges;       // Canny edges after color masking
  std::vector<std::uint8_t> color_mask;  // blurred and binarized color path
  std::vector<float> grad_x;             // Sobel on the blurred gray image
  std::vector<float> grad_y;

  [[nodiscard]] std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
  [[nodiscard]] std::size_t edge_count() const;
};

/// Separable Gaussian blur with replicated borders.
std::vector<float> gaussian_blur(const std::vector<float>& plane, int width, int height, double sigma);

/// Canny on a gray plane: blur, Sobel, non-maximum suppression, hysteresis.
/// Gradients are written to grad_x / grad_y when provided.
std::vector<std::uint8_t> canny(const std::vector<float>& gray, int width, int height, double sigma, double high,
                                double low, std::vector<float>* grad_x = nullptr,
                                std::vector<float>* grad_y = nullptr);

/// `expected_radius` sets the color-path blur (10% of it).
EdgeMap preprocess(const RasterImage& img, BallColor target, double edge_sigma, double expected_radius,
                   double canny_high = 100.0);

/// Accumulator maxima that survive center suppression, best first. Scores are vote counts.
struct CircleCandidate {
  Vec2 center;
  double score = 0.0;
};
std::vector<CircleCandidate> hough_candidates(const EdgeMap& edges, const HoughParams& params);

std::vector<DetectedCircle> hough_circles(const EdgeMap& edges, const HoughParams& params);

/// Signals that no accumulator threshold gives exactly the expected circle count.
class BlurEscalationNeeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kTunerTolerance = 0.5;

/// Smallest para2 (within kTunerTolerance) for which exactly `expected_k` circles are returned.
double tune_accumulator_threshold(const EdgeMap& edges, const HoughParams& params, int expected_k);

struct ColorCheck {
  bool passed = false;
  double fraction = 0.0;
};
inline constexpr int kColorCheckSamples = 32;
inline constexpr double kColorCheckRing = 0.9;
inline constexpr double kColorCheckMinFraction = 0.25;

ColorCheck color_check(const RasterImage& img, const DetectedCircle& circle, BallColor target);

/// Full per-color detection: preprocess, tune, detect, with blur escalation on failure.
struct BallDetection {
  std::optional<DetectedCircle> circle;
  ColorCheck check;
  double para2 = 0.0;
  double blur_sigma = 0.0;
  int escalations = 0;
};

struct DetectorConfig {
  HoughParams hough{};
  double expected_radius = 14.0;   // px, sets the color blur
  double sigma_growth = 1.5;       // blur escalation factor
  double max_blur_sigma = 4.0;     // largest tolerable edge blur
};

BallDetection detect_ball(const RasterImage& img, BallColor color, const DetectorConfig& cfg);

// ---------------------------------------------------------------------------
// Synthetic scene rendering

struct SceneBall {
  BallColor color = BallColor::red;
  Vec3 center;  // world, mm
};

/// Image-space bar drawn over the balls (tool shaft or other clutter).
struct Occluder {
  Vec2 a;
  Vec2 b;
  double half_width = 4.0;
  Rgb color{90, 90, 90};
};

struct RenderOptions {
  Rgb background{18, 18, 22};
  double pixel_noise = 0.0;  // Gaussian sigma in 8-bit levels
  unsigned noise_seed = 0;
};

struct ProjectedBall {
  BallColor color = BallColor::red;
  Vec2 center;
  double radius = 0.0;
  double depth = 0.0;
  bool visible = false;        // in front of the camera and fully inside the image
  double arc_occlusion = 0.0;  // fraction of the border hidden by nearer balls or occluders
};

struct RenderedView {
  RasterImage image;
  std::vector<ProjectedBall> balls;
  bool partial = false;  // some ball behind the camera or outside the image
};

/// Projected circle of a sphere: center at the projected ball center, radius f * r / Z.
std::optional<ProjectedBall> project_ball(const CameraModel& cam, const SceneBall& ball, double ball_radius);

/// Projections with border occlusion, without painting.
std::vector<ProjectedBall> project_scene(const CameraModel& cam, const std::vector<SceneBall>& balls,
                                         double ball_radius, const std::vector<Occluder>& occluders = {});

RenderedView render_view(const CameraModel& cam, const std::vector<SceneBall>& balls, double ball_radius,
                         const std::vector<Occluder>& occluders = {}, const RenderOptions& options = {});

/// `occluders[i]` (optional) is drawn over camera i's view. Noise seeds advance per camera.
std::vector<RenderedView> render_scene(const std::vector<CameraModel>& cams, const std::vector<SceneBall>& balls,
                                       double ball_radius, const RenderOptions& options = {},
                                       const std::vector<std::vector<Occluder>>& occluders = {});

}  // namespace eep
