#include "eep/image_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

namespace eep {

std::string_view color_name(BallColor c) {
  switch (c) {
    case BallColor::red: return "red";
    case BallColor::green: return "green";
    case BallColor::yellow: return "yellow";
  }
  return "unknown";
}

BallColor parse_color(std::string_view name) {
  for (auto c : kBallColors) {
    if (color_name(c) == name) return c;
  }
  throw std::invalid_argument("unknown ball color '" + std::string(name) + "'");
}

Rgb render_color(BallColor c) {
  switch (c) {
    case BallColor::red: return {210, 35, 30};
    case BallColor::green: return {35, 185, 60};
    case BallColor::yellow: return {225, 205, 40};
  }
  return {};
}

bool ColorGate::accepts(Rgb px) const {
  const double r = px.r, g = px.g, b = px.b;
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  if (mx <= 0.0) return false;
  const double v = mx / 255.0;
  const double s = (mx - mn) / mx;
  if (v < min_value || s < min_saturation) return false;
  const double d = mx - mn;
  double h;
  if (mx == r) {
    h = 60.0 * std::fmod((g - b) / d, 6.0);
  } else if (mx == g) {
    h = 60.0 * ((b - r) / d + 2.0);
  } else {
    h = 60.0 * ((r - g) / d + 4.0);
  }
  if (h < 0) h += 360.0;
  double dist = std::abs(h - hue_center);
  dist = std::min(dist, 360.0 - dist);
  return dist <= hue_half_width;
}

ColorGate default_gate(BallColor c) {
  switch (c) {
    case BallColor::red: return {0.0, 20.0, 0.4, 0.15};
    case BallColor::green: return {120.0, 30.0, 0.4, 0.15};
    case BallColor::yellow: return {60.0, 20.0, 0.4, 0.15};
  }
  return {};
}

void HoughParams::validate() const {
  if (!(dp >= 1.0)) throw std::invalid_argument("Hough dp must be >= 1");
  if (!(r_min > 0.0 && r_min < r_max)) throw std::invalid_argument("Hough radius range must satisfy 0 < r_min < r_max");
  if (!(d_min > 0.0)) throw std::invalid_argument("Hough d_min must be positive");
  if (!(para2 > 0.0)) throw std::invalid_argument("Hough para2 must be positive");
  if (!(blur_sigma > 0.0)) throw std::invalid_argument("blur sigma must be positive");
}

std::size_t EdgeMap::edge_count() const {
  return static_cast<std::size_t>(std::count(edges.begin(), edges.end(), std::uint8_t{1}));
}

std::vector<float> gaussian_blur(const std::vector<float>& plane, int width, int height, double sigma) {
  if (!(sigma > 0.0)) return plane;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += kernel[i + radius];
  }
  for (auto& k : kernel) k /= sum;

  // Whole-row accumulation in tap order; borders are replicated through a padded row.
  const auto w = static_cast<std::size_t>(width);
  std::vector<float> tmp(plane.size());
  std::vector<float> out(plane.size());
  std::vector<float> padded(w + 2 * static_cast<std::size_t>(radius));
  std::vector<double> acc(w);
  for (int y = 0; y < height; ++y) {
    const float* row = &plane[static_cast<std::size_t>(y) * w];
    std::fill(padded.begin(), padded.begin() + radius, row[0]);
    std::copy(row, row + w, padded.begin() + radius);
    std::fill(padded.begin() + radius + static_cast<std::ptrdiff_t>(w), padded.end(), row[w - 1]);
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int i = 0; i <= 2 * radius; ++i) {
      const double k = kernel[i];
      const float* src = padded.data() + i;
      for (std::size_t x = 0; x < w; ++x) acc[x] += k * src[x];
    }
    float* dst = &tmp[static_cast<std::size_t>(y) * w];
    for (std::size_t x = 0; x < w; ++x) dst[x] = static_cast<float>(acc[x]);
  }
  for (int y = 0; y < height; ++y) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int i = -radius; i <= radius; ++i) {
      const double k = kernel[i + radius];
      const float* src = &tmp[static_cast<std::size_t>(std::clamp(y + i, 0, height - 1)) * w];
      for (std::size_t x = 0; x < w; ++x) acc[x] += k * src[x];
    }
    float* dst = &out[static_cast<std::size_t>(y) * w];
    for (std::size_t x = 0; x < w; ++x) dst[x] = static_cast<float>(acc[x]);
  }
  return out;
}

std::vector<std::uint8_t> canny(const std::vector<float>& gray, int width, int height, double sigma, double high,
                                double low, std::vector<float>* grad_x, std::vector<float>* grad_y) {
  const std::vector<float> g = gaussian_blur(gray, width, height, sigma);
  const std::size_t n = g.size();
  std::vector<float> gx(n), gy(n), mag(n);
  auto px = [&](int x, int y) {
    return g[static_cast<std::size_t>(std::clamp(y, 0, height - 1)) * width + std::clamp(x, 0, width - 1)];
  };
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const float sx = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1)) -
                       (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
      const float sy = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1)) -
                       (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      gx[i] = sx;
      gy[i] = sy;
      mag[i] = std::hypot(sx, sy);
    }
  }

  // Non-maximum suppression along the quantized gradient direction.
  constexpr double kTan22 = 0.41421356237309503;
  std::vector<std::uint8_t> state(n, 0);  // 0 none, 1 weak, 2 strong
  for (int y = 1; y < height - 1; ++y) {
    for (int x = 1; x < width - 1; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      const float m = mag[i];
      if (m <= low) continue;
      const double ax = std::abs(gx[i]), ay = std::abs(gy[i]);
      int dx, dy;
      if (ay <= ax * kTan22) {
        dx = 1, dy = 0;
      } else if (ax <= ay * kTan22) {
        dx = 0, dy = 1;
      } else {
        dx = 1;
        dy = (gx[i] * gy[i] > 0) ? 1 : -1;
      }
      const float m1 = mag[i + dy * width + dx];
      const float m2 = mag[i - dy * width - dx];
      if (m > m1 && m >= m2) state[i] = m > high ? 2 : 1;
    }
  }

  std::vector<std::uint8_t> edges(n, 0);
  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < n; ++i) {
    if (state[i] == 2) {
      edges[i] = 1;
      queue.push_back(i);
    }
  }
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    const int x = static_cast<int>(i % width), y = static_cast<int>(i / width);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int xx = x + dx, yy = y + dy;
        if (xx < 0 || yy < 0 || xx >= width || yy >= height) continue;
        const std::size_t j = static_cast<std::size_t>(yy) * width + xx;
        if (state[j] == 1 && !edges[j]) {
          edges[j] = 1;
          queue.push_back(j);
        }
      }
    }
  }
  if (grad_x) *grad_x = std::move(gx);
  if (grad_y) *grad_y = std::move(gy);
  return edges;
}

EdgeMap preprocess(const RasterImage& img, BallColor target, double edge_sigma, double expected_radius,
                   double canny_high) {
  if (!(edge_sigma > 0.0)) throw std::invalid_argument("blur sigma must be positive");
  const int w = img.width(), h = img.height();
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<float> gray(n), color(n);
  const ColorGate gate = default_gate(target);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Rgb p = img.at(x, y);
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      gray[i] = static_cast<float>(0.299 * p.r + 0.587 * p.g + 0.114 * p.b);
      color[i] = gate.accepts(p) ? 1.0f : 0.0f;
    }
  }

  EdgeMap out;
  out.width = w;
  out.height = h;
  out.color = target;
  out.edges = canny(gray, w, h, edge_sigma, canny_high, canny_high / 2.0, &out.grad_x, &out.grad_y);

  // A low binarization level after blurring grows each blob by roughly 1.3 sigma,
  // so boundary edges of the ball fall inside the mask.
  const double color_sigma = std::max(0.5, 0.1 * expected_radius);
  const std::vector<float> blurred = gaussian_blur(color, w, h, color_sigma);
  out.color_mask.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.color_mask[i] = blurred[i] > 0.1f ? 1 : 0;
    out.edges[i] = out.edges[i] & out.color_mask[i];
  }
  return out;
}

namespace {

struct Accumulator {
  int w = 0, h = 0;
  std::vector<int> votes;
  std::vector<int> score;  // 3x3 box sum of votes
};

Accumulator vote(const EdgeMap& edges, const HoughParams& p) {
  Accumulator acc;
  acc.w = static_cast<int>(std::ceil(edges.width / p.dp));
  acc.h = static_cast<int>(std::ceil(edges.height / p.dp));
  acc.votes.assign(static_cast<std::size_t>(acc.w) * acc.h, 0);
  const double inv = 1.0 / p.dp;
  for (int y = 0; y < edges.height; ++y) {
    for (int x = 0; x < edges.width; ++x) {
      const std::size_t i = edges.index(x, y);
      if (!edges.edges[i]) continue;
      const double gx = edges.grad_x[i], gy = edges.grad_y[i];
      const double m = std::hypot(gx, gy);
      if (m <= 0.0) continue;
      const double ux = gx / m * inv, uy = gy / m * inv;
      const double cx = x * inv, cy = y * inv;
      for (double r = p.r_min; r <= p.r_max + 1e-9; r += 1.0) {
        for (const double s : {1.0, -1.0}) {
          const double fx = std::floor(cx + s * r * ux + 0.5);
          const double fy = std::floor(cy + s * r * uy + 0.5);
          if (fx < 0.0 || fy < 0.0 || fx >= acc.w || fy >= acc.h) continue;
          ++acc.votes[static_cast<std::size_t>(fy) * acc.w + static_cast<std::size_t>(fx)];
        }
      }
    }
  }
  // Separable 3x3 box sum, zero outside the accumulator.
  std::vector<int> rows(acc.votes.size(), 0);
  for (int y = 0; y < acc.h; ++y) {
    const int* v = &acc.votes[static_cast<std::size_t>(y) * acc.w];
    int* o = &rows[static_cast<std::size_t>(y) * acc.w];
    for (int x = 0; x < acc.w; ++x) o[x] = v[x] + (x > 0 ? v[x - 1] : 0) + (x + 1 < acc.w ? v[x + 1] : 0);
  }
  acc.score.assign(acc.votes.size(), 0);
  for (int y = 0; y < acc.h; ++y) {
    int* o = &acc.score[static_cast<std::size_t>(y) * acc.w];
    for (int dy = -1; dy <= 1; ++dy) {
      const int yy = y + dy;
      if (yy < 0 || yy >= acc.h) continue;
      const int* r = &rows[static_cast<std::size_t>(yy) * acc.w];
      for (int x = 0; x < acc.w; ++x) o[x] += r[x];
    }
  }
  return acc;
}

struct RadiusFit {
  Vec2 center;
  double radius = 0.0;
  bool ok = false;
};

// Radius from the distance histogram of edge points, then a geometric circle fit
// over the edge points near that circle whose gradients point radially.
RadiusFit fit_radius(const EdgeMap& edges, const HoughParams& p, const Vec2& center0) {
  std::vector<Vec2> pts;
  std::vector<Vec2> grads;
  const double reach = p.r_max + 3.0;
  const int x0 = std::max(0, static_cast<int>(std::floor(center0.x() - reach)));
  const int x1 = std::min(edges.width - 1, static_cast<int>(std::ceil(center0.x() + reach)));
  const int y0 = std::max(0, static_cast<int>(std::floor(center0.y() - reach)));
  const int y1 = std::min(edges.height - 1, static_cast<int>(std::ceil(center0.y() + reach)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const std::size_t i = edges.index(x, y);
      if (!edges.edges[i]) continue;
      pts.emplace_back(x, y);
      grads.emplace_back(edges.grad_x[i], edges.grad_y[i]);
    }
  }
  RadiusFit out{center0, 0.0, false};
  if (pts.empty()) return out;

  const int b0 = static_cast<int>(std::floor(p.r_min));
  const int b1 = static_cast<int>(std::ceil(p.r_max));
  std::vector<int> hist(b1 - b0 + 3, 0);
  for (const auto& q : pts) {
    const long b = std::lround((q - center0).norm());
    if (b >= b0 - 1 && b <= b1 + 1) ++hist[b - b0 + 1];
  }
  int best_bin = -1, best = 0;
  for (int b = b0; b <= b1; ++b) {
    const int k = b - b0 + 1;
    const int s = hist[k - 1] + hist[k] + hist[k + 1];
    if (s > best) {
      best = s;
      best_bin = b;
    }
  }
  if (best_bin < 0) return out;

  Vec2 c = center0;
  double r = best_bin;
  // The ball outline has one gradient polarity; edges of clutter crossing the ball
  // near its border mostly have the other or point sideways.
  double polarity = 0.0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const Vec2 d = pts[k] - c;
    const double dist = d.norm(), gn = grads[k].norm();
    if (dist < 1e-9 || gn <= 0.0 || std::abs(dist - r) > 1.5) continue;
    polarity += d.dot(grads[k]) / (dist * gn);
  }
  const double sign = polarity < 0.0 ? -1.0 : 1.0;
  for (int iter = 0; iter < 8; ++iter) {
    const double gate = iter < 2 ? 1.5 : 1.0;
    Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
    Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
    int used = 0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const Vec2 d = pts[k] - c;
      const double dist = d.norm();
      if (dist < 1e-9 || std::abs(dist - r) > gate) continue;
      const Vec2 u = d / dist;
      const double gn = grads[k].norm();
      if (gn <= 0.0 || sign * u.dot(grads[k]) / gn < 0.9) continue;
      const Eigen::Vector3d j{-u.x(), -u.y(), -1.0};
      jtj += j * j.transpose();
      jtr += j * (dist - r);
      ++used;
    }
    if (used < 8) return out;
    const Eigen::Vector3d step = jtj.ldlt().solve(-jtr);
    if (!step.allFinite()) return out;
    c += step.head<2>();
    r += step(2);
    if (iter >= 2 && step.norm() < 1e-6) break;
  }
  if ((c - center0).norm() > 3.0 * p.dp || r < p.r_min - 1.0 || r > p.r_max + 1.0) return out;
  if (c.x() < 0 || c.y() < 0 || c.x() > edges.width - 1 || c.y() > edges.height - 1) return out;
  out.center = c;
  out.radius = std::clamp(r, p.r_min, p.r_max);
  out.ok = true;
  return out;
}

}  // namespace

std::vector<CircleCandidate> hough_candidates(const EdgeMap& edges, const HoughParams& params) {
  params.validate();
  const Accumulator acc = vote(edges, params);
  struct Peak {
    int x, y, score;
  };
  std::vector<Peak> peaks;
  for (int y = 0; y < acc.h; ++y) {
    for (int x = 0; x < acc.w; ++x) {
      const int s = acc.score[static_cast<std::size_t>(y) * acc.w + x];
      if (s <= 0) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (!dx && !dy) continue;
          const int xx = x + dx, yy = y + dy;
          if (xx < 0 || yy < 0 || xx >= acc.w || yy >= acc.h) continue;
          const int t = acc.score[static_cast<std::size_t>(yy) * acc.w + xx];
          // Plateaus resolve to their first cell in row-major order.
          const bool earlier = dy < 0 || (dy == 0 && dx < 0);
          if (earlier ? t >= s : t > s) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) peaks.push_back({x, y, s});
    }
  }
  std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.score > b.score; });

  std::vector<CircleCandidate> out;
  for (const auto& pk : peaks) {
    // Sub-cell center from the vote centroid around the peak.
    double sw = 0.0, sx = 0.0, sy = 0.0;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int xx = pk.x + dx, yy = pk.y + dy;
        if (xx < 0 || yy < 0 || xx >= acc.w || yy >= acc.h) continue;
        const double v = acc.votes[static_cast<std::size_t>(yy) * acc.w + xx];
        sw += v;
        sx += v * xx;
        sy += v * yy;
      }
    }
    const Vec2 c{sx / sw * params.dp, sy / sw * params.dp};
    const bool suppressed = std::any_of(out.begin(), out.end(), [&](const CircleCandidate& a) {
      return (a.center - c).norm() < params.d_min;
    });
    if (!suppressed) out.push_back({c, static_cast<double>(pk.score)});
  }
  return out;
}

std::vector<DetectedCircle> hough_circles(const EdgeMap& edges, const HoughParams& params) {
  std::vector<DetectedCircle> out;
  for (const auto& cand : hough_candidates(edges, params)) {
    if (cand.score < params.para2) break;
    const RadiusFit fit = fit_radius(edges, params, cand.center);
    DetectedCircle c;
    c.color = edges.color;
    c.accumulator_score = cand.score;
    if (fit.ok) {
      c.center = fit.center;
      c.radius = fit.radius;
    } else {
      c.center = cand.center;
      c.radius = 0.5 * (params.r_min + params.r_max);
    }
    out.push_back(c);
  }
  return out;
}

double tune_accumulator_threshold(const EdgeMap& edges, const HoughParams& params, int expected_k) {
  if (expected_k < 1) throw std::invalid_argument("expected circle count must be >= 1");
  const auto cands = hough_candidates(edges, params);
  auto count = [&](double t) {
    return static_cast<int>(std::count_if(cands.begin(), cands.end(), [t](const auto& c) { return c.score >= t; }));
  };
  if (static_cast<int>(cands.size()) < expected_k) {
    throw BlurEscalationNeeded("only " + std::to_string(cands.size()) + " circle candidates for " +
                               std::to_string(expected_k) + " expected");
  }
  // Every candidate has at least one vote; with exactly k candidates the bound is the floor.
  if (static_cast<int>(cands.size()) == expected_k) return 1.0;

  double lo = 0.0;  // count > k
  double hi = cands.front().score + 1.0;  // count < k
  while (hi - lo > kTunerTolerance) {
    const double mid = 0.5 * (lo + hi);
    if (count(mid) > expected_k) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (count(hi) != expected_k) {
    throw BlurEscalationNeeded("accumulator threshold jumps from " + std::to_string(count(lo)) + " to " +
                               std::to_string(count(hi)) + " circles");
  }
  return hi;
}

ColorCheck color_check(const RasterImage& img, const DetectedCircle& circle, BallColor target) {
  const ColorGate gate = default_gate(target);
  int hits = 0;
  for (int i = 0; i < kColorCheckSamples; ++i) {
    const double a = 2.0 * std::numbers::pi * i / kColorCheckSamples;
    const long x = std::lround(circle.center.x() + kColorCheckRing * circle.radius * std::cos(a));
    const long y = std::lround(circle.center.y() + kColorCheckRing * circle.radius * std::sin(a));
    if (!img.contains(static_cast<int>(x), static_cast<int>(y))) continue;
    if (gate.accepts(img.at(static_cast<int>(x), static_cast<int>(y)))) ++hits;
  }
  ColorCheck out;
  out.fraction = static_cast<double>(hits) / kColorCheckSamples;
  out.passed = out.fraction > kColorCheckMinFraction;
  return out;
}

BallDetection detect_ball(const RasterImage& img, BallColor color, const DetectorConfig& cfg) {
  BallDetection out;
  HoughParams p = cfg.hough;
  p.validate();
  for (double sigma = p.blur_sigma; sigma <= cfg.max_blur_sigma + 1e-9; sigma *= cfg.sigma_growth) {
    out.blur_sigma = sigma;
    const EdgeMap edges = preprocess(img, color, sigma, cfg.expected_radius, p.para1);
    try {
      p.para2 = tune_accumulator_threshold(edges, p, 1);
    } catch (const BlurEscalationNeeded&) {
      ++out.escalations;
      continue;
    }
    p.blur_sigma = sigma;
    const auto circles = hough_circles(edges, p);
    out.para2 = p.para2;
    if (!circles.empty()) {
      out.circle = circles.front();
      out.check = color_check(img, *out.circle, color);
    }
    return out;
  }
  return out;
}

}  // namespace eep
