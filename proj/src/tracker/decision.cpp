#include <algorithm>
#include <cmath>
#include <numeric>

#include "ibvs/tracker.hpp"

namespace ibvs {

double DecisionMatrix::sample(const Vec2& p) const {
  const int x = std::clamp(static_cast<int>(std::lround(p.x())), 0, width - 1);
  const int y = std::clamp(static_cast<int>(std::lround(p.y())), 0, height - 1);
  return at(x, y);
}

double calibrated_threshold(int nominal_candidates) {
  const std::vector<double> w = candidate_weights(std::max(1, nominal_candidates));
  return 1.0 + 1.5 * w.back();
}

DecisionMatrix init_decision_matrix(const CameraIntrinsics& intr, double expected_radius, double threshold) {
  if (!(expected_radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "expected radius must be positive");
  DecisionMatrix d;
  d.width = intr.width;
  d.height = intr.height;
  d.principal_point = intr.principal_point;
  d.expected_radius = expected_radius;
  d.threshold = threshold;
  d.grid.resize(static_cast<std::size_t>(d.width) * d.height);
  const double inv = 1.0 / (2.0 * expected_radius * expected_radius);
  for (int y = 0; y < d.height; ++y)
    for (int x = 0; x < d.width; ++x) {
      const double dx = x - d.principal_point.x(), dy = y - d.principal_point.y();
      d.grid[static_cast<std::size_t>(y) * d.width + x] = std::exp(-(dx * dx + dy * dy) * inv);
    }
  return d;
}

namespace {

std::vector<std::size_t> rank_by_confidence(std::span<const CircleCandidate> candidates, const IdealProjection& ideal) {
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return confidence_score(candidates[a], ideal) < confidence_score(candidates[b], ideal);
  });
  return order;
}

}  // namespace

DecisionMatrix update_decision_matrix(DecisionMatrix d, std::span<const CircleCandidate> candidates,
                                      const IdealProjection& ideal) {
  if (candidates.empty()) return d;
  const std::vector<std::size_t> order = rank_by_confidence(candidates, ideal);
  const std::vector<double> weights = candidate_weights(static_cast<int>(candidates.size()));
  const std::size_t n = candidates.size();
  for (std::size_t rank = 0; rank < n; ++rank) {
    const CircleCandidate& c = candidates[order[rank]];
    // Best candidate (rank 0) receives the largest weight. P(I|F_s) = 1.
    const double amplitude = weights[n - 1 - rank];
    const double r = c.radius;
    const double inv = 1.0 / (2.0 * r * r);
    const int x0 = std::max(0, static_cast<int>(std::floor(c.center.x() - 3 * r)));
    const int x1 = std::min(d.width - 1, static_cast<int>(std::ceil(c.center.x() + 3 * r)));
    const int y0 = std::max(0, static_cast<int>(std::floor(c.center.y() - 3 * r)));
    const int y1 = std::min(d.height - 1, static_cast<int>(std::ceil(c.center.y() + 3 * r)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double dx = x - c.center.x(), dy = y - c.center.y();
        const double d2 = dx * dx + dy * dy;
        if (d2 > 9 * r * r) continue;
        d.grid[static_cast<std::size_t>(y) * d.width + x] += amplitude * std::exp(-d2 * inv);
      }
  }
  ++d.cycles_since_reset;
  return d;
}

std::optional<CircleCandidate> try_select(const DecisionMatrix& d, std::span<const CircleCandidate> candidates) {
  std::optional<CircleCandidate> best;
  double best_value = d.threshold;
  double best_score = 0.0;
  const IdealProjection ideal = d.ideal();
  for (const CircleCandidate& c : candidates) {
    const double v = d.sample(c.center);
    if (!(v > d.threshold)) continue;
    const double score = confidence_score(c, ideal);
    if (!best || v > best_value || (v == best_value && score < best_score)) {
      best = c;
      best_value = v;
      best_score = score;
    }
  }
  return best;
}

}  // namespace ibvs
