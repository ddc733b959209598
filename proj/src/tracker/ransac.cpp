#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "ibvs/tracker.hpp"

namespace ibvs {

void RansacConfig::validate() const {
  if (iterations <= 0 || !(inlier_threshold > 0.0) || !(min_inlier_ratio > 0.0 && min_inlier_ratio <= 1.0) ||
      coverage_bins < 4)
    throw Error(ErrorCode::InvalidArgument, "invalid RANSAC configuration");
}

std::optional<Conic> fit_ellipse_direct(std::span<const Vec2> points) {
  const std::size_t n = points.size();
  if (n < 5) return std::nullopt;
  // Halir-Flusser partitioning of the Fitzgibbon scatter matrix.
  Eigen::Matrix3d s1 = Eigen::Matrix3d::Zero(), s2 = Eigen::Matrix3d::Zero(), s3 = Eigen::Matrix3d::Zero();
  for (const Vec2& p : points) {
    const Eigen::Vector3d q(p.x() * p.x(), p.x() * p.y(), p.y() * p.y());
    const Eigen::Vector3d l(p.x(), p.y(), 1.0);
    s1 += q * q.transpose();
    s2 += q * l.transpose();
    s3 += l * l.transpose();
  }
  const Eigen::FullPivLU<Eigen::Matrix3d> lu(s3);
  if (!lu.isInvertible()) return std::nullopt;
  const Eigen::Matrix3d t = -lu.solve(s2.transpose());
  const Eigen::Matrix3d m = s1 + s2 * t;
  Eigen::Matrix3d reduced;
  reduced.row(0) = m.row(2) / 2.0;
  reduced.row(1) = -m.row(1);
  reduced.row(2) = m.row(0) / 2.0;

  const Eigen::EigenSolver<Eigen::Matrix3d> eig(reduced);
  if (eig.info() != Eigen::Success) return std::nullopt;
  std::optional<Eigen::Vector3d> best;
  double best_constraint = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector3d v = eig.eigenvectors().col(i).real();
    const double constraint = 4.0 * v(0) * v(2) - v(1) * v(1);
    if (constraint > best_constraint) {
      best_constraint = constraint;
      best = v;
    }
  }
  if (!best) return std::nullopt;
  Conic c;
  c << *best, t * *best;
  if (!c.allFinite()) return std::nullopt;
  return c;
}

EllipseParams conic_to_ellipse(const Conic& k) {
  Eigen::Matrix2d a;
  a << k(0), k(1) / 2.0, k(1) / 2.0, k(2);
  const Vec2 lin(k(3), k(4));
  if (!(a.determinant() > 0.0)) throw Error(ErrorCode::InvalidArgument, "conic is not an ellipse");
  const Vec2 center = -0.5 * a.inverse() * lin;
  const double at_center = k(5) + 0.5 * lin.dot(center);
  const Eigen::Matrix2d shape = a / (-at_center);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(shape);
  const Vec2 ev = eig.eigenvalues();
  if (!(ev(0) > 0.0) || !std::isfinite(ev(1))) throw Error(ErrorCode::InvalidArgument, "conic is an imaginary ellipse");
  EllipseParams e;
  e.center = center;
  e.semi_major = 1.0 / std::sqrt(ev(0));
  e.semi_minor = 1.0 / std::sqrt(ev(1));
  const Vec2 axis = eig.eigenvectors().col(0);
  double alpha = std::atan2(axis.y(), axis.x());
  if (alpha <= -std::numbers::pi / 2) alpha += std::numbers::pi;
  if (alpha > std::numbers::pi / 2) alpha -= std::numbers::pi;
  e.orientation = alpha;
  return e;
}

double conic_distance(const Conic& k, const Vec2& p) {
  const double x = p.x(), y = p.y();
  const double value = k(0) * x * x + k(1) * x * y + k(2) * y * y + k(3) * x + k(4) * y + k(5);
  const double gx = 2 * k(0) * x + k(1) * y + k(3);
  const double gy = k(1) * x + 2 * k(2) * y + k(4);
  const double g = std::sqrt(gx * gx + gy * gy);
  return g > 0.0 ? std::abs(value) / g : INFINITY;
}

namespace {

// Points shifted to their centroid and scaled to unit mean distance.
struct Normalization {
  Vec2 mean = Vec2::Zero();
  double scale = 1.0;
};

Normalization normalize(std::span<const Vec2> pts, std::vector<Vec2>& out) {
  Normalization n;
  for (const Vec2& p : pts) n.mean += p;
  n.mean /= static_cast<double>(pts.size());
  double dist = 0.0;
  for (const Vec2& p : pts) dist += (p - n.mean).norm();
  dist /= static_cast<double>(pts.size());
  n.scale = dist > 0.0 ? 1.0 / dist : 1.0;
  out.clear();
  for (const Vec2& p : pts) out.push_back((p - n.mean) * n.scale);
  return n;
}

double angular_coverage(const EllipseParams& e, std::span<const Vec2> pts, const std::vector<bool>& inliers, int bins) {
  std::vector<char> hit(bins, 0);
  const double c = std::cos(e.orientation), s = std::sin(e.orientation);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!inliers[i]) continue;
    const Vec2 d = pts[i] - e.center;
    const double u = (c * d.x() + s * d.y()) / e.semi_major;
    const double v = (-s * d.x() + c * d.y()) / e.semi_minor;
    const double t = std::atan2(v, u) + std::numbers::pi;  // [0, 2 pi]
    hit[std::min(bins - 1, static_cast<int>(t / (2 * std::numbers::pi) * bins))] = 1;
  }
  return static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / bins;
}

}  // namespace

EllipseFit ransac_ellipse(std::span<const Vec2> points, const RansacConfig& cfg) {
  cfg.validate();
  const std::size_t n = points.size();
  if (n < 5) throw Error(ErrorCode::TooFewPoints, "RANSAC ellipse fit needs at least 5 points");

  std::vector<Vec2> pts;
  const Normalization norm = normalize(points, pts);
  const double threshold = cfg.inlier_threshold * norm.scale;

  auto count_inliers = [&](const Conic& c, std::vector<bool>& mask) {
    std::size_t count = 0;
    mask.assign(n, false);
    for (std::size_t i = 0; i < n; ++i)
      if (conic_distance(c, pts[i]) < threshold) {
        mask[i] = true;
        ++count;
      }
    return count;
  };

  std::mt19937_64 rng(cfg.rng_seed);
  std::optional<Conic> best;
  std::vector<bool> best_mask, mask;
  std::size_t best_count = 0;
  std::array<std::size_t, 5> idx{};
  std::array<Vec2, 5> sample;
  for (int it = 0; it < cfg.iterations; ++it) {
    for (int k = 0; k < 5; ++k) {
      bool fresh;
      do {
        idx[k] = static_cast<std::size_t>(rng() % n);
        fresh = std::find(idx.begin(), idx.begin() + k, idx[k]) == idx.begin() + k;
      } while (!fresh && n > 5);
      sample[k] = pts[idx[k]];
    }
    const std::optional<Conic> c = fit_ellipse_direct(sample);
    if (!c) continue;
    const std::size_t count = count_inliers(*c, mask);
    if (count > best_count) {
      best_count = count;
      best = c;
      best_mask = mask;
    }
  }
  if (!best || best_count < 5) throw Error(ErrorCode::NoConsensus, "no ellipse hypothesis found");

  // Refit on the consensus set, then re-score once.
  std::vector<Vec2> inlier_pts;
  for (std::size_t i = 0; i < n; ++i)
    if (best_mask[i]) inlier_pts.push_back(pts[i]);
  if (const std::optional<Conic> refit = fit_ellipse_direct(inlier_pts)) {
    std::vector<bool> refit_mask;
    const std::size_t refit_count = count_inliers(*refit, refit_mask);
    if (refit_count >= best_count / 2) {
      best = refit;
      best_mask = std::move(refit_mask);
      best_count = refit_count;
    }
  }

  EllipseParams e;
  try {
    e = conic_to_ellipse(*best);
  } catch (const Error&) {
    throw Error(ErrorCode::NoConsensus, "consensus conic is not an ellipse");
  }
  e.center = e.center / norm.scale + norm.mean;
  e.semi_major /= norm.scale;
  e.semi_minor /= norm.scale;

  EllipseFit fit;
  fit.ellipse = e;
  fit.inliers = std::move(best_mask);
  fit.inlier_ratio = static_cast<double>(best_count) / static_cast<double>(n);
  fit.coverage = angular_coverage(e, points, fit.inliers, cfg.coverage_bins);
  if (fit.support() < cfg.min_inlier_ratio) {
    throw Error(ErrorCode::NoConsensus, "ellipse consensus below the minimum inlier ratio (inliers " +
                                            std::to_string(fit.inlier_ratio) + ", coverage " +
                                            std::to_string(fit.coverage) + ")");
  }
  return fit;
}

}  // namespace ibvs
