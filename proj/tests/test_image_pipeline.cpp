#include "eep/image_pipeline.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <numbers>

namespace eep {
namespace {

const CameraModel kAxisCam{Pose{}, Intrinsics{}};

RasterImage render_balls(const std::vector<SceneBall>& balls, const std::vector<Occluder>& occ = {},
                         double noise = 0.0) {
  RenderOptions opt;
  opt.pixel_noise = noise;
  opt.noise_seed = 5;
  return render_view(kAxisCam, balls, 20.0, occ, opt).image;
}

HoughParams params_for(double radius) {
  HoughParams p;
  p.r_min = radius * 0.7;
  p.r_max = radius * 1.3;
  p.d_min = radius;
  p.para2 = 1.0;
  return p;
}

// Fraction of the ball border hidden by the occluder, by direct sampling.
double hidden_fraction(const Vec2& c, double r, const Occluder& o) {
  int hidden = 0;
  for (int i = 0; i < 3600; ++i) {
    const double a = 2 * std::numbers::pi * i / 3600;
    const Vec2 p = c + r * Vec2(std::cos(a), std::sin(a));
    const Vec2 ab = o.b - o.a;
    const double t = std::clamp((p - o.a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    if ((p - (o.a + t * ab)).norm() <= o.half_width) ++hidden;
  }
  return hidden / 3600.0;
}

TEST(Render, ProjectedRadiusIsFocalTimesRadiusOverDepth) {
  const auto pb = project_ball(kAxisCam, {BallColor::green, {0, 0, 1000}}, 20.0);
  ASSERT_TRUE(pb);
  EXPECT_DOUBLE_EQ(pb->radius, 10.0);
  EXPECT_DOUBLE_EQ(pb->center.x(), 320.0);
  EXPECT_DOUBLE_EQ(pb->center.y(), 240.0);
  EXPECT_TRUE(pb->visible);
}

TEST(Render, ThreeSeparatedBallsGiveThreeOracleCircles) {
  const std::vector<SceneBall> balls{
      {BallColor::red, {-150, 0, 1000}}, {BallColor::green, {0, 0, 1000}}, {BallColor::yellow, {150, 0, 1000}}};
  const RenderedView v = render_view(kAxisCam, balls, 20.0);
  ASSERT_EQ(v.balls.size(), 3u);
  for (const auto& b : v.balls) {
    EXPECT_TRUE(b.visible);
    EXPECT_EQ(b.arc_occlusion, 0.0);
  }
  EXPECT_FALSE(v.partial);
  EXPECT_EQ(v.image.at(320, 240), render_color(BallColor::green));
  EXPECT_EQ(v.image.at(245, 240), render_color(BallColor::red));
}

TEST(Render, NearerBallOccludesFartherOne) {
  const std::vector<SceneBall> balls{{BallColor::red, {0, 0, 1000}}, {BallColor::green, {10, 0, 600}}};
  const RenderedView v = render_view(kAxisCam, balls, 20.0);
  EXPECT_GT(v.balls[0].arc_occlusion, 0.0);
  EXPECT_EQ(v.balls[1].arc_occlusion, 0.0);
  EXPECT_EQ(v.image.at(320, 240), render_color(BallColor::green));
}

TEST(Render, BallBehindCameraFlagsPartial) {
  const RenderedView v = render_view(kAxisCam, {{BallColor::red, {0, 0, -500}}}, 20.0);
  EXPECT_TRUE(v.partial);
}

TEST(Render, OccluderArcMatchesDirectSampling) {
  const Occluder o{{300, 231}, {340, 231}, 3.0};
  const auto proj = project_scene(kAxisCam, {{BallColor::green, {0, 0, 1000}}}, 20.0, {o});
  // The renderer samples just inside the border.
  EXPECT_NEAR(proj[0].arc_occlusion, hidden_fraction({320, 240}, 9.5, o), 0.01);
}

TEST(Gates, EachRenderColorPassesOnlyItsOwnGate) {
  for (const auto c : kBallColors) {
    for (const auto g : kBallColors) {
      EXPECT_EQ(default_gate(g).accepts(render_color(c)), c == g);
    }
    EXPECT_FALSE(default_gate(c).accepts({18, 18, 22}));
  }
}

TEST(Preprocess, UniformImageHasNoEdges) {
  const RasterImage img(64, 48, render_color(BallColor::green));
  EXPECT_EQ(preprocess(img, BallColor::green, 1.5, 14).edge_count(), 0u);
}

TEST(Preprocess, EdgesTraceTheOracleOutline) {
  const RasterImage img = render_balls({{BallColor::green, {0, 0, 700}}});
  const double r = 500.0 * 20 / 700;
  const EdgeMap e = preprocess(img, BallColor::green, 1.5, r);
  ASSERT_GT(e.edge_count(), 50u);
  for (int y = 0; y < e.height; ++y) {
    for (int x = 0; x < e.width; ++x) {
      if (!e.edges[e.index(x, y)]) continue;
      EXPECT_LE(std::abs((Vec2(x, y) - Vec2(320, 240)).norm() - r), 1.0) << x << "," << y;
    }
  }
}

TEST(Preprocess, OtherTargetColorGatesEverythingOut) {
  const RasterImage img = render_balls({{BallColor::green, {0, 0, 700}}});
  EXPECT_EQ(preprocess(img, BallColor::red, 1.5, 14).edge_count(), 0u);
}

TEST(Preprocess, ColorMaskContainsTheDisk) {
  const RasterImage img = render_balls({{BallColor::yellow, {0, 0, 700}}});
  const double r = 500.0 * 20 / 700;
  const EdgeMap e = preprocess(img, BallColor::yellow, 1.5, r);
  for (int y = 0; y < e.height; ++y) {
    for (int x = 0; x < e.width; ++x) {
      if ((Vec2(x, y) - Vec2(320, 240)).norm() <= r + 0.5) EXPECT_TRUE(e.color_mask[e.index(x, y)]);
    }
  }
}

TEST(Hough, CleanCircleRadiusTen) {
  const RasterImage img = render_balls({{BallColor::red, {0, 0, 1000}}});
  const EdgeMap e = preprocess(img, BallColor::red, 1.5, 10);
  HoughParams p = params_for(10);
  p.para2 = tune_accumulator_threshold(e, p, 1);
  const auto circles = hough_circles(e, p);
  ASSERT_EQ(circles.size(), 1u);
  EXPECT_LE((circles[0].center - Vec2(320, 240)).norm(), 1.0);
  EXPECT_NEAR(circles[0].radius, 10.0, 1.0);
  EXPECT_EQ(circles[0].color, BallColor::red);
}

TEST(Hough, SurvivesThirtyPercentArcOcclusion) {
  const Vec3 ball{0, 0, 700};
  const double r = 500.0 * 20 / 700;
  const HoughParams base = params_for(r);
  const RasterImage clean = render_balls({{BallColor::green, ball}});
  const double full = hough_candidates(preprocess(clean, BallColor::green, 1.5, r), base).front().score;

  // A bar whose border coverage is close to 30%.
  const Occluder o{{320 - 40, 240 - r}, {320 + 40, 240 - r}, 5.0};
  const double hidden = project_scene(kAxisCam, {{BallColor::green, ball}}, 20.0, {o})[0].arc_occlusion;
  ASSERT_GT(hidden, 0.2);
  ASSERT_LE(hidden, 0.3);

  HoughParams p = base;
  p.para2 = 0.6 * full;
  const auto circles = hough_circles(preprocess(render_balls({{BallColor::green, ball}}, {o}), BallColor::green, 1.5, r), p);
  ASSERT_FALSE(circles.empty());
  EXPECT_LE((circles[0].center - Vec2(320, 240)).norm(), 1.0);
}

TEST(Hough, EmptyMaskGivesNothing) {
  const EdgeMap e = preprocess(RasterImage(80, 60), BallColor::red, 1.5, 10);
  EXPECT_TRUE(hough_circles(e, params_for(10)).empty());
  EXPECT_THROW(tune_accumulator_threshold(e, params_for(10), 1), BlurEscalationNeeded);
}

TEST(Hough, ParamValidation) {
  HoughParams p;
  p.r_min = 20;
  p.r_max = 10;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = HoughParams{};
  p.dp = 0.5;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

class ThreeGreenBalls : public ::testing::Test {
 protected:
  void SetUp() override {
    img_ = render_balls({{BallColor::green, {-120, -40, 700}}, {BallColor::green, {0, 50, 700}},
                         {BallColor::green, {130, -20, 700}}},
                        {}, 2.0);
    edges_ = preprocess(img_, BallColor::green, 1.5, r_);
    params_ = params_for(r_);
  }
  double r_ = 500.0 * 20 / 700;
  RasterImage img_;
  EdgeMap edges_;
  HoughParams params_;
};

TEST_F(ThreeGreenBalls, TunedThresholdYieldsExactlyK) {
  HoughParams p = params_;
  p.para2 = tune_accumulator_threshold(edges_, p, 3);
  EXPECT_EQ(hough_circles(edges_, p).size(), 3u);
}

TEST_F(ThreeGreenBalls, TunedThresholdIsALowerBound) {
  const auto cands = hough_candidates(edges_, params_);
  HoughParams p = params_;
  p.para2 = tune_accumulator_threshold(edges_, p, 2);
  ASSERT_GT(cands.size(), 2u);
  EXPECT_EQ(hough_circles(edges_, p).size(), 2u);
  p.para2 -= kTunerTolerance;
  EXPECT_GT(hough_circles(edges_, p).size(), 2u);
  p.para2 -= 1.0 - kTunerTolerance;
  EXPECT_GE(hough_circles(edges_, p).size(), 3u);
}

TEST(Tuner, UnreachableCountSignalsBlurEscalation) {
  const RasterImage img = render_balls({{BallColor::green, {-100, 0, 700}}, {BallColor::green, {100, 0, 700}}});
  const EdgeMap e = preprocess(img, BallColor::green, 1.5, 14.3);
  EXPECT_THROW(tune_accumulator_threshold(e, params_for(14.3), 3), BlurEscalationNeeded);
}

TEST(ColorCheck, OnBallPasses) {
  const RasterImage img = render_balls({{BallColor::green, {0, 0, 700}}});
  const auto c = color_check(img, {{320, 240}, 14.3, BallColor::green, 0}, BallColor::green);
  EXPECT_TRUE(c.passed);
  EXPECT_DOUBLE_EQ(c.fraction, 1.0);
}

TEST(ColorCheck, OnBackgroundFails) {
  const RasterImage img = render_balls({{BallColor::green, {0, 0, 700}}});
  const auto c = color_check(img, {{100, 100}, 14.3, BallColor::green, 0}, BallColor::green);
  EXPECT_FALSE(c.passed);
  EXPECT_EQ(c.fraction, 0.0);
}

TEST(ColorCheck, PartialOverlapPasses) {
  const RasterImage img = render_balls({{BallColor::green, {0, 0, 700}}});
  // Same radius, shifted by one radius. A ring point at angle t lies on the ball
  // when 1 + 1.8 cos t + 0.81 < 1, i.e. cos t < -0.45.
  const double expected = std::acos(0.45) / std::numbers::pi;
  const auto c = color_check(img, {{320 + 14.3, 240}, 14.3, BallColor::green, 0}, BallColor::green);
  EXPECT_TRUE(c.passed);
  EXPECT_NEAR(c.fraction, expected, 2.0 / kColorCheckSamples);
}

TEST(ColorCheck, WrongColorFails) {
  const RasterImage img = render_balls({{BallColor::yellow, {0, 0, 700}}});
  EXPECT_FALSE(color_check(img, {{320, 240}, 14.3, BallColor::red, 0}, BallColor::red).passed);
}

TEST(DetectBall, NoisyRenderedBall) {
  const RasterImage img = render_balls(
      {{BallColor::red, {-100, 0, 700}}, {BallColor::green, {0, 30, 650}}, {BallColor::yellow, {100, 0, 700}}}, {},
      2.0);
  DetectorConfig cfg;
  cfg.hough = params_for(14.3);
  for (const auto c : kBallColors) {
    const auto proj = project_ball(kAxisCam,
                                   {c, c == BallColor::red     ? Vec3(-100, 0, 700)
                                       : c == BallColor::green ? Vec3(0, 30, 650)
                                                               : Vec3(100, 0, 700)},
                                   20.0);
    const BallDetection d = detect_ball(img, c, cfg);
    ASSERT_TRUE(d.circle) << color_name(c);
    EXPECT_LE((d.circle->center - proj->center).norm(), 1.0);
    EXPECT_LE(std::abs(d.circle->radius - proj->radius), 1.5);
    EXPECT_TRUE(d.check.passed);
  }
}

TEST(DetectBall, MissingColorFindsNothing) {
  const RasterImage img = render_balls({{BallColor::red, {0, 0, 700}}});
  DetectorConfig cfg;
  cfg.hough = params_for(14.3);
  const BallDetection d = detect_ball(img, BallColor::green, cfg);
  EXPECT_FALSE(d.circle);
  EXPECT_GT(d.escalations, 0);
}

TEST(Ppm, BitExactRoundTrip) {
  const auto dir = testing::scratch_dir("ppm");
  const RasterImage img = render_balls({{BallColor::red, {0, 0, 700}}}, {}, 3.0);
  write_ppm(dir / "a.ppm", img);
  EXPECT_EQ(read_ppm(dir / "a.ppm"), img);
}

TEST(Colors, NamesRoundTrip) {
  for (const auto c : kBallColors) EXPECT_EQ(parse_color(color_name(c)), c);
  EXPECT_THROW(parse_color("blue"), std::invalid_argument);
}

}  // namespace
}  // namespace eep
