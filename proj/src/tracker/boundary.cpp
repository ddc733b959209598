#include <algorithm>
#include <array>
#include <cmath>

#include "ibvs/tracker.hpp"

namespace ibvs {

bool RoiCircle::covers_image(int width, int height) const {
  const double xs[2] = {0.0, width - 1.0};
  const double ys[2] = {0.0, height - 1.0};
  for (double x : xs)
    for (double y : ys)
      if (!contains(Vec2(x, y))) return false;
  return true;
}

namespace {

// Local raster covering the ROI's bounding box (clipped to the image).
struct RoiRaster {
  int x0 = 0, y0 = 0, w = 0, h = 0;
  std::vector<std::uint8_t> inside;  // ROI membership
  std::vector<std::uint8_t> fg;      // foreground

  bool in(int x, int y) const { return x >= 0 && y >= 0 && x < w && y < h; }
  std::uint8_t& at(std::vector<std::uint8_t>& v, int x, int y) { return v[static_cast<std::size_t>(y) * w + x]; }
  std::uint8_t get(const std::vector<std::uint8_t>& v, int x, int y) const {
    return in(x, y) ? v[static_cast<std::size_t>(y) * w + x] : 0;
  }
};

int otsu_threshold(const std::array<long, 256>& hist) {
  long total = 0;
  double sum_all = 0;
  for (int i = 0; i < 256; ++i) {
    total += hist[i];
    sum_all += static_cast<double>(i) * hist[i];
  }
  long w_bg = 0;
  double sum_bg = 0, best = -1;
  int level = 255;  // a single-valued ROI has no foreground
  for (int t = 0; t < 256; ++t) {
    w_bg += hist[t];
    if (w_bg == 0) continue;
    const long w_fg = total - w_bg;
    if (w_fg == 0) break;
    sum_bg += static_cast<double>(t) * hist[t];
    const double m_bg = sum_bg / w_bg;
    const double m_fg = (sum_all - sum_bg) / w_fg;
    const double between = static_cast<double>(w_bg) * w_fg * (m_bg - m_fg) * (m_bg - m_fg);
    if (between > best) {
      best = between;
      level = t;
    }
  }
  return level;
}

// Clockwise neighbour order on screen (y down), starting west.
constexpr std::array<std::array<int, 2>, 8> kClockwise{{{-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}}};

int neighbour_index(int dx, int dy) {
  for (int i = 0; i < 8; ++i)
    if (kClockwise[i][0] == dx && kClockwise[i][1] == dy) return i;
  return -1;
}

std::uint8_t freeman_code(int dx, int dy) {
  // 0 E, 1 NE, 2 N, 3 NW, 4 W, 5 SW, 6 S, 7 SE with N meaning -y.
  static constexpr int table[3][3] = {{3, 2, 1}, {4, -1, 0}, {5, 6, 7}};
  return static_cast<std::uint8_t>(table[dy + 1][dx + 1]);
}

// Moore-neighbour tracing with Jacob's stopping criterion. `start` is the
// first foreground pixel of its component in raster order.
Boundary trace(const RoiRaster& r, int sx, int sy) {
  Boundary b;
  b.points.emplace_back(sx, sy);
  int cx = sx, cy = sy;
  int back = 0;  // west of the start pixel is background
  int first_x = -1, first_y = -1;
  const std::size_t limit = 4 * static_cast<std::size_t>(r.w) * r.h + 8;
  while (b.chain.size() < limit) {
    int found = -1;
    for (int k = 1; k <= 8; ++k) {
      const int i = (back + k) % 8;
      if (r.get(r.fg, cx + kClockwise[i][0], cy + kClockwise[i][1])) {
        found = i;
        break;
      }
    }
    if (found < 0) break;  // isolated pixel
    const int nx = cx + kClockwise[found][0], ny = cy + kClockwise[found][1];
    const int prev = (found + 7) % 8;
    const int bx = cx + kClockwise[prev][0], by = cy + kClockwise[prev][1];
    if (cx == sx && cy == sy) {
      if (first_x < 0) {
        first_x = nx;
        first_y = ny;
      } else if (nx == first_x && ny == first_y) {
        break;  // re-entering the start the same way: contour closed
      }
    }
    b.chain.push_back(freeman_code(nx - cx, ny - cy));
    back = neighbour_index(bx - nx, by - ny);
    cx = nx;
    cy = ny;
    if (cx != sx || cy != sy) b.points.emplace_back(cx, cy);
  }
  return b;
}

}  // namespace

BoundaryExtraction extract_boundary_detailed(const Frame& frame, const RoiCircle& roi) {
  BoundaryExtraction out;
  out.mask = Frame(frame.width, frame.height, 0);

  RoiRaster r;
  r.x0 = std::max(0, static_cast<int>(std::floor(roi.center.x() - roi.radius)));
  r.y0 = std::max(0, static_cast<int>(std::floor(roi.center.y() - roi.radius)));
  const int x1 = std::min(frame.width - 1, static_cast<int>(std::ceil(roi.center.x() + roi.radius)));
  const int y1 = std::min(frame.height - 1, static_cast<int>(std::ceil(roi.center.y() + roi.radius)));
  if (x1 < r.x0 || y1 < r.y0 || !(roi.radius > 0)) throw Error(ErrorCode::NoBoundary, "ROI does not intersect the image");
  r.w = x1 - r.x0 + 1;
  r.h = y1 - r.y0 + 1;
  r.inside.assign(static_cast<std::size_t>(r.w) * r.h, 0);
  r.fg.assign(r.inside.size(), 0);

  std::array<long, 256> hist{};
  for (int y = 0; y < r.h; ++y)
    for (int x = 0; x < r.w; ++x)
      if (roi.contains(Vec2(x + r.x0, y + r.y0))) {
        r.at(r.inside, x, y) = 1;
        ++hist[frame.at(x + r.x0, y + r.y0)];
      }
  const int level = otsu_threshold(hist);
  out.threshold = level;

  std::vector<std::uint8_t> raw(r.inside.size(), 0);
  for (int y = 0; y < r.h; ++y)
    for (int x = 0; x < r.w; ++x)
      raw[static_cast<std::size_t>(y) * r.w + x] = r.get(r.inside, x, y) && frame.at(x + r.x0, y + r.y0) > level;

  // 3x3 opening.
  std::vector<std::uint8_t> eroded(raw.size(), 0);
  for (int y = 0; y < r.h; ++y)
    for (int x = 0; x < r.w; ++x) {
      bool all = true;
      for (int dy = -1; dy <= 1 && all; ++dy)
        for (int dx = -1; dx <= 1 && all; ++dx) all = r.get(raw, x + dx, y + dy);
      eroded[static_cast<std::size_t>(y) * r.w + x] = all;
    }
  for (int y = 0; y < r.h; ++y)
    for (int x = 0; x < r.w; ++x) {
      bool any = false;
      for (int dy = -1; dy <= 1 && !any; ++dy)
        for (int dx = -1; dx <= 1 && !any; ++dx) any = r.get(eroded, x + dx, y + dy);
      r.at(r.fg, x, y) = any;
    }

  for (int y = 0; y < r.h; ++y)
    for (int x = 0; x < r.w; ++x)
      if (r.get(r.fg, x, y)) out.mask.at(x + r.x0, y + r.y0) = 255;

  // Components in raster order; each is traced from its first pixel.
  std::vector<int> label(r.fg.size(), 0);
  int next_label = 0;
  std::vector<std::array<int, 2>> stack;
  for (int y = 0; y < r.h; ++y)
    for (int x = 0; x < r.w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * r.w + x;
      if (!r.fg[i] || label[i]) continue;
      ++next_label;
      label[i] = next_label;
      stack.push_back({x, y});
      while (!stack.empty()) {
        const auto [px, py] = stack.back();
        stack.pop_back();
        for (const auto& d : kClockwise) {
          const int qx = px + d[0], qy = py + d[1];
          if (!r.get(r.fg, qx, qy)) continue;
          const std::size_t j = static_cast<std::size_t>(qy) * r.w + qx;
          if (label[j]) continue;
          label[j] = next_label;
          stack.push_back({qx, qy});
        }
      }
      Boundary b = trace(r, x, y);
      for (auto& p : b.points) p += Eigen::Vector2i(r.x0, r.y0);
      out.boundaries.push_back(std::move(b));
    }

  std::stable_sort(out.boundaries.begin(), out.boundaries.end(),
                   [](const Boundary& a, const Boundary& b) { return a.points.size() > b.points.size(); });
  if (out.boundaries.empty() || out.boundaries.front().points.size() < 16)
    throw Error(ErrorCode::NoBoundary, "no boundary with at least 16 points in the ROI");
  return out;
}

std::vector<Boundary> extract_boundary(const Frame& frame, const RoiCircle& roi) {
  return extract_boundary_detailed(frame, roi).boundaries;
}

std::vector<Vec2> boundary_edge_points(const Boundary& boundary, const Frame& mask, const RoiCircle& roi) {
  static constexpr int kFour[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  std::vector<Vec2> out;
  out.reserve(boundary.points.size());
  const double rim = roi.radius - 1.5;
  for (const auto& p : boundary.points) {
    if (p.x() <= 0 || p.y() <= 0 || p.x() >= mask.width - 1 || p.y() >= mask.height - 1) continue;
    if ((Vec2(p.x(), p.y()) - roi.center).norm() >= rim) continue;
    Vec2 sum = Vec2::Zero();
    int n = 0;
    for (const auto& d : kFour) {
      if (!mask.at(p.x() + d[0], p.y() + d[1])) {
        sum += Vec2(p.x() + 0.5 * d[0], p.y() + 0.5 * d[1]);
        ++n;
      }
    }
    out.push_back(n ? Vec2(sum / n) : Vec2(p.x(), p.y()));
  }
  return out;
}

}  // namespace ibvs
