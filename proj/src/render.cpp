#include "eep/image_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace eep {

namespace {

constexpr int kSuper = 4;

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

Rgb blend(Rgb under, Rgb over, double coverage) {
  auto mix = [coverage](std::uint8_t u, std::uint8_t o) {
    return static_cast<std::uint8_t>(std::lround(coverage * o + (1.0 - coverage) * u));
  };
  return {mix(under.r, over.r), mix(under.g, over.g), mix(under.b, over.b)};
}

// Paints a shape given by a signed distance (negative inside), supersampling the
// pixels whose centers lie within one pixel of the boundary.
template <typename Sdf>
void paint(RasterImage& img, double x0, double x1, double y0, double y1, Rgb color, Sdf sdf) {
  const int ix0 = std::max(0, static_cast<int>(std::floor(x0)) - 1);
  const int ix1 = std::min(img.width() - 1, static_cast<int>(std::ceil(x1)) + 1);
  const int iy0 = std::max(0, static_cast<int>(std::floor(y0)) - 1);
  const int iy1 = std::min(img.height() - 1, static_cast<int>(std::ceil(y1)) + 1);
  for (int y = iy0; y <= iy1; ++y) {
    for (int x = ix0; x <= ix1; ++x) {
      const double d = sdf(Vec2(x, y));
      double coverage;
      if (d < -1.0) {
        coverage = 1.0;
      } else if (d > 1.0) {
        continue;
      } else {
        int inside = 0;
        for (int sy = 0; sy < kSuper; ++sy) {
          for (int sx = 0; sx < kSuper; ++sx) {
            const Vec2 q{x - 0.5 + (sx + 0.5) / kSuper, y - 0.5 + (sy + 0.5) / kSuper};
            if (sdf(q) <= 0.0) ++inside;
          }
        }
        if (!inside) continue;
        coverage = static_cast<double>(inside) / (kSuper * kSuper);
      }
      img.set(x, y, blend(img.at(x, y), color, coverage));
    }
  }
}

}  // namespace

std::optional<ProjectedBall> project_ball(const CameraModel& cam, const SceneBall& ball, double ball_radius) {
  const double z = cam.depth(ball.center);
  if (!(z > ball_radius)) return std::nullopt;
  ProjectedBall pb;
  pb.color = ball.color;
  pb.center = cam.project(ball.center);
  pb.radius = cam.intrinsics.focal_px * ball_radius / z;
  pb.depth = z;
  const int w = cam.intrinsics.image_size.width, h = cam.intrinsics.image_size.height;
  pb.visible = pb.center.x() - pb.radius >= 0 && pb.center.y() - pb.radius >= 0 &&
               pb.center.x() + pb.radius <= w - 1 && pb.center.y() + pb.radius <= h - 1;
  return pb;
}

std::vector<ProjectedBall> project_scene(const CameraModel& cam, const std::vector<SceneBall>& balls,
                                         double ball_radius, const std::vector<Occluder>& occluders) {
  std::vector<ProjectedBall> out;
  for (const auto& b : balls) {
    const auto pb = project_ball(cam, b, ball_radius);
    if (!pb) {
      ProjectedBall hidden;
      hidden.color = b.color;
      hidden.arc_occlusion = 1.0;
      out.push_back(hidden);
      continue;
    }
    out.push_back(*pb);
  }

  // Border occlusion from nearer balls and occluders, sampled just inside the rim.
  constexpr int kArcSamples = 360;
  for (auto& pb : out) {
    if (!(pb.depth > 0)) continue;
    int hidden = 0;
    for (int k = 0; k < kArcSamples; ++k) {
      const double a = 2.0 * std::numbers::pi * k / kArcSamples;
      const Vec2 q = pb.center + (pb.radius - 0.5) * Vec2(std::cos(a), std::sin(a));
      bool covered = std::any_of(out.begin(), out.end(), [&](const ProjectedBall& other) {
        return &other != &pb && other.depth > 0 && other.depth < pb.depth && (q - other.center).norm() < other.radius;
      });
      covered = covered || std::any_of(occluders.begin(), occluders.end(), [&](const Occluder& o) {
                  return segment_distance(q, o.a, o.b) < o.half_width;
                });
      if (covered) ++hidden;
    }
    pb.arc_occlusion = static_cast<double>(hidden) / kArcSamples;
  }
  return out;
}

RenderedView render_view(const CameraModel& cam, const std::vector<SceneBall>& balls, double ball_radius,
                         const std::vector<Occluder>& occluders, const RenderOptions& options) {
  const auto& size = cam.intrinsics.image_size;
  RenderedView view;
  view.image = RasterImage(size.width, size.height, options.background);
  view.balls = project_scene(cam, balls, ball_radius, occluders);
  view.partial = std::any_of(view.balls.begin(), view.balls.end(), [](const ProjectedBall& b) { return !b.visible; });

  // Painter's order: farthest ball first.
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < view.balls.size(); ++i) {
    if (view.balls[i].depth > 0) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return view.balls[a].depth > view.balls[b].depth; });
  for (const auto i : order) {
    const auto& pb = view.balls[i];
    paint(view.image, pb.center.x() - pb.radius, pb.center.x() + pb.radius, pb.center.y() - pb.radius,
          pb.center.y() + pb.radius, render_color(pb.color),
          [&](const Vec2& q) { return (q - pb.center).norm() - pb.radius; });
  }
  for (const auto& o : occluders) {
    paint(view.image, std::min(o.a.x(), o.b.x()) - o.half_width, std::max(o.a.x(), o.b.x()) + o.half_width,
          std::min(o.a.y(), o.b.y()) - o.half_width, std::max(o.a.y(), o.b.y()) + o.half_width, o.color,
          [&](const Vec2& q) { return segment_distance(q, o.a, o.b) - o.half_width; });
  }

  if (options.pixel_noise > 0.0) {
    std::mt19937_64 rng(options.noise_seed);
    std::normal_distribution<double> noise(0.0, options.pixel_noise);
    for (auto& byte : view.image.bytes()) {
      byte = static_cast<std::uint8_t>(std::clamp(std::lround(byte + noise(rng)), 0L, 255L));
    }
  }
  return view;
}

std::vector<RenderedView> render_scene(const std::vector<CameraModel>& cams, const std::vector<SceneBall>& balls,
                                       double ball_radius, const RenderOptions& options,
                                       const std::vector<std::vector<Occluder>>& occluders) {
  std::vector<RenderedView> out;
  out.reserve(cams.size());
  for (std::size_t i = 0; i < cams.size(); ++i) {
    RenderOptions o = options;
    o.noise_seed = options.noise_seed + static_cast<unsigned>(i);
    const std::vector<Occluder> none;
    out.push_back(render_view(cams[i], balls, ball_radius, i < occluders.size() ? occluders[i] : none, o));
  }
  return out;
}

}  // namespace eep
