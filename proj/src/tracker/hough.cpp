#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "ibvs/tracker.hpp"

namespace ibvs {

namespace {

struct Gradients {
  int width = 0, height = 0;
  std::vector<float> gx, gy, mag;
};

// 5-tap binomial blur followed by Sobel.
Gradients compute_gradients(const Frame& frame) {
  const int w = frame.width, h = frame.height;
  const float k[5] = {1.f / 16, 4.f / 16, 6.f / 16, 4.f / 16, 1.f / 16};
  std::vector<float> tmp(static_cast<std::size_t>(w) * h), blur(tmp.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float s = 0;
      for (int i = -2; i <= 2; ++i) s += k[i + 2] * frame.at(std::clamp(x + i, 0, w - 1), y);
      tmp[static_cast<std::size_t>(y) * w + x] = s;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float s = 0;
      for (int i = -2; i <= 2; ++i) s += k[i + 2] * tmp[static_cast<std::size_t>(std::clamp(y + i, 0, h - 1)) * w + x];
      blur[static_cast<std::size_t>(y) * w + x] = s;
    }

  Gradients g;
  g.width = w;
  g.height = h;
  g.gx.assign(blur.size(), 0.f);
  g.gy.assign(blur.size(), 0.f);
  g.mag.assign(blur.size(), 0.f);
  auto b = [&](int x, int y) { return blur[static_cast<std::size_t>(y) * w + x]; };
  for (int y = 1; y < h - 1; ++y)
    for (int x = 1; x < w - 1; ++x) {
      const float dx = (b(x + 1, y - 1) + 2 * b(x + 1, y) + b(x + 1, y + 1)) - (b(x - 1, y - 1) + 2 * b(x - 1, y) + b(x - 1, y + 1));
      const float dy = (b(x - 1, y + 1) + 2 * b(x, y + 1) + b(x + 1, y + 1)) - (b(x - 1, y - 1) + 2 * b(x, y - 1) + b(x + 1, y - 1));
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      g.gx[i] = dx;
      g.gy[i] = dy;
      g.mag[i] = std::sqrt(dx * dx + dy * dy);
    }
  return g;
}

struct EdgePoint {
  int x, y;
  float ux, uy;  // unit gradient, pointing towards brighter pixels
  float mag;
};

// Edge pixels that are local maxima along their gradient direction.
std::vector<EdgePoint> thin_edges(const Gradients& g, float floor_mag) {
  std::vector<EdgePoint> out;
  const int w = g.width;
  for (int y = 1; y < g.height - 1; ++y)
    for (int x = 1; x < w - 1; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const float m = g.mag[i];
      if (m < floor_mag || m <= 0.f) continue;
      const float ux = g.gx[i] / m, uy = g.gy[i] / m;
      const int sx = static_cast<int>(std::lround(ux)), sy = static_cast<int>(std::lround(uy));
      const float ahead = g.mag[static_cast<std::size_t>(y + sy) * w + (x + sx)];
      const float behind = g.mag[static_cast<std::size_t>(y - sy) * w + (x - sx)];
      if (m >= ahead && m > behind) out.push_back({x, y, ux, uy, m});
    }
  return out;
}

// Algebraic (Kasa) circle fit.
bool fit_circle(const std::vector<Vec2>& pts, Vec2& center, double& radius) {
  if (pts.size() < 3) return false;
  Eigen::MatrixXd a(pts.size(), 3);
  Eigen::VectorXd b(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    a(i, 0) = pts[i].x();
    a(i, 1) = pts[i].y();
    a(i, 2) = 1.0;
    b(i) = pts[i].squaredNorm();
  }
  const Eigen::Vector3d s = a.colPivHouseholderQr().solve(b);
  center = Vec2(s(0) / 2, s(1) / 2);
  const double r2 = s(2) + center.squaredNorm();
  if (!(r2 > 0.0)) return false;
  radius = std::sqrt(r2);
  return center.allFinite();
}

std::vector<CircleCandidate> search_level(const std::vector<EdgePoint>& edges, int w, int h, double rmin, double rmax,
                                          double min_support) {
  std::vector<int> acc(static_cast<std::size_t>(w) * h, 0);
  const int r_lo = static_cast<int>(std::floor(rmin));
  const int r_hi = static_cast<int>(std::ceil(rmax));
  for (const EdgePoint& e : edges) {
    for (int r = r_lo; r <= r_hi; ++r) {
      const int cx = static_cast<int>(std::lround(e.x + r * e.ux));
      const int cy = static_cast<int>(std::lround(e.y + r * e.uy));
      if (cx < 0 || cy < 0 || cx >= w || cy >= h) break;
      ++acc[static_cast<std::size_t>(cy) * w + cx];
    }
  }
  // 3x3 box sum of the accumulator.
  std::vector<int> smooth(acc.size(), 0);
  for (int y = 1; y < h - 1; ++y)
    for (int x = 1; x < w - 1; ++x) {
      int s = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) s += acc[static_cast<std::size_t>(y + dy) * w + x + dx];
      smooth[static_cast<std::size_t>(y) * w + x] = s;
    }

  const int nms = std::max(2, static_cast<int>(rmin / 2));
  const int min_votes = static_cast<int>(0.2 * std::numbers::pi * rmin);
  struct Peak {
    int x, y, votes;
  };
  std::vector<Peak> peaks;
  for (int y = 1; y < h - 1; ++y)
    for (int x = 1; x < w - 1; ++x) {
      const int v = smooth[static_cast<std::size_t>(y) * w + x];
      if (v < min_votes) continue;
      bool is_max = true;
      for (int dy = -nms; dy <= nms && is_max; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= h) continue;
        for (int dx = -nms; dx <= nms; ++dx) {
          const int xx = x + dx;
          if (xx < 0 || xx >= w || (dx == 0 && dy == 0)) continue;
          const int o = smooth[static_cast<std::size_t>(yy) * w + xx];
          // Strict on one side so plateaus keep exactly one peak.
          if (o > v || (o == v && (dy < 0 || (dy == 0 && dx < 0)))) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) peaks.push_back({x, y, v});
    }
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
    if (a.votes != b.votes) return a.votes > b.votes;
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  });
  if (peaks.size() > 64) peaks.resize(64);

  std::vector<CircleCandidate> out;
  const int bins = r_hi + 3;
  for (const Peak& p : peaks) {
    const Vec2 c(p.x, p.y);
    std::vector<int> hist(bins, 0);
    for (const EdgePoint& e : edges) {
      const Vec2 d = c - Vec2(e.x, e.y);
      const double dist = d.norm();
      if (dist < rmin - 1 || dist > rmax + 1 || dist <= 0) continue;
      if ((d.x() * e.ux + d.y() * e.uy) / dist < 0.9) continue;
      const int bin = static_cast<int>(std::lround(dist));
      if (bin >= 0 && bin < bins) ++hist[bin];
    }
    int best_r = -1;
    double best_support = 0.0;
    for (int r = std::max(1, r_lo); r <= r_hi && r + 1 < bins; ++r) {
      const double support = (hist[r - 1] + hist[r] + hist[r + 1]) / (2.0 * std::numbers::pi * r);
      if (support > best_support) {
        best_support = support;
        best_r = r;
      }
    }
    if (best_r < 0) continue;

    std::vector<Vec2> pts;
    for (const EdgePoint& e : edges) {
      const Vec2 d = c - Vec2(e.x, e.y);
      const double dist = d.norm();
      if (dist <= 0 || std::abs(dist - best_r) > 2.0) continue;
      if ((d.x() * e.ux + d.y() * e.uy) / dist < 0.9) continue;
      pts.emplace_back(e.x, e.y);
    }
    Vec2 center;
    double radius;
    if (!fit_circle(pts, center, radius)) continue;
    int on_circle = 0;
    for (const Vec2& q : pts)
      if (std::abs((q - center).norm() - radius) <= 1.5) ++on_circle;
    const double support = std::min(1.0, on_circle / (2.0 * std::numbers::pi * radius));
    if (support < min_support) continue;
    if (radius < 0.9 * rmin || radius > 1.1 * rmax) continue;
    if (center.x() < 0 || center.y() < 0 || center.x() > w - 1 || center.y() > h - 1) continue;
    out.push_back({center, radius, support});
  }
  return out;
}

}  // namespace

std::vector<CircleCandidate> adaptive_hough(const Frame& frame, double min_radius, double max_radius,
                                            const HoughConfig& cfg) {
  std::vector<CircleCandidate> merged;
  if (frame.width < 3 || frame.height < 3) return merged;
  min_radius = std::max(min_radius, 4.0);
  max_radius = std::min(max_radius, std::min(frame.width, frame.height) / 2.0);
  if (!(max_radius >= min_radius)) return merged;

  const Gradients g = compute_gradients(frame);
  const float peak = *std::max_element(g.mag.begin(), g.mag.end());
  // Flat images (below a couple of gray levels of contrast) hold no circles.
  if (peak < 16.f) return merged;

  const std::vector<EdgePoint> all_edges = thin_edges(g, 0.f);
  for (double level : cfg.levels) {
    const float threshold = static_cast<float>(level) * peak;
    std::vector<EdgePoint> edges;
    for (const EdgePoint& e : all_edges)
      if (e.mag >= threshold) edges.push_back(e);
    for (const CircleCandidate& c : search_level(edges, g.width, g.height, min_radius, max_radius, cfg.min_support)) {
      bool duplicate = false;
      for (CircleCandidate& m : merged) {
        const double tol = std::max(4.0, 0.25 * m.radius);
        if ((m.center - c.center).norm() < tol && std::abs(m.radius - c.radius) < tol) {
          // Finer levels see more of the contour; keep the better-supported fit.
          if (c.accumulator_score > m.accumulator_score) m = c;
          duplicate = true;
          break;
        }
      }
      if (!duplicate) merged.push_back(c);
    }
  }
  if (static_cast<int>(merged.size()) > cfg.max_candidates) {
    std::stable_sort(merged.begin(), merged.end(), [](const CircleCandidate& a, const CircleCandidate& b) {
      return a.accumulator_score > b.accumulator_score;
    });
    merged.resize(cfg.max_candidates);
  }
  return merged;
}

double confidence_score(const CircleCandidate& c, const IdealProjection& ideal) {
  return std::abs((c.center.x() - ideal.x0) / ideal.x0) + std::abs((c.center.y() - ideal.y0) / ideal.y0) +
         std::abs((c.radius - ideal.r0) / ideal.r0);
}

std::vector<double> candidate_weights(int n) {
  std::vector<double> w;
  if (n < 1) return w;
  const double total = 0.5 * n * (n + 1.0);
  for (int i = 1; i <= n; ++i) w.push_back(i / total);
  return w;
}

}  // namespace ibvs
