#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "ibvs/error.hpp"
#include "ibvs/imaging.hpp"
#include "ibvs/tracker.hpp"
#include "oracles.hpp"

using namespace ibvs;

namespace {

const CameraIntrinsics kIntr;

Frame disks(const std::vector<std::array<double, 3>>& circles, int fg = 200, int bg = 40) {
  Frame f(kIntr.width, kIntr.height);
  std::fill(f.pixels.begin(), f.pixels.end(), static_cast<std::uint8_t>(bg));
  for (const auto& c : circles)
    for (const auto& p : oracle::raster_ellipse(c[0], c[1], c[2], c[2], 0.0, f.width, f.height).pixels)
      f.at(p.x(), p.y()) = static_cast<std::uint8_t>(fg);
  return f;
}

SceneConfig target_scene(double z = 0.5) {
  SceneConfig s;
  s.target = {Vec3(0, 0, z), 0.04};
  return s;
}

double target_radius_px(const SceneConfig& s) { return project_sphere(s.target).semi_major * kIntr.focal_px(); }

Frame render_scene(const SceneConfig& s, std::uint64_t seed = 1, double t = 0.0) {
  return render(s, RigidTransform::identity(), kIntr, t, seed);
}

std::vector<Vec2> ellipse_points(const EllipseParams& e, int n) {
  std::vector<Vec2> pts;
  const double c = std::cos(e.orientation), s = std::sin(e.orientation);
  for (int i = 0; i < n; ++i) {
    const double th = 2.0 * std::numbers::pi * i / n;
    const double u = e.semi_major * std::cos(th), v = e.semi_minor * std::sin(th);
    pts.emplace_back(e.center.x() + c * u - s * v, e.center.y() + s * u + c * v);
  }
  return pts;
}

double angle_diff(double a, double b) {
  double d = std::fmod(a - b, std::numbers::pi);
  if (d > std::numbers::pi / 2) d -= std::numbers::pi;
  if (d < -std::numbers::pi / 2) d += std::numbers::pi;
  return std::abs(d);
}

EllipseParams reference_ellipse() { return {Vec2(320, 240), 80.0, 60.0, 0.3}; }

std::vector<Vec2> with_outliers(double fraction, std::uint64_t seed) {
  std::vector<Vec2> pts = ellipse_points(reference_ellipse(), 200);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, 640.0), uy(0.0, 480.0);
  std::vector<int> idx(pts.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  std::shuffle(idx.begin(), idx.end(), rng);
  const int n = static_cast<int>(std::lround(fraction * pts.size()));
  for (int i = 0; i < n; ++i) pts[idx[i]] = Vec2(ux(rng), uy(rng));
  return pts;
}

// Locks a tracker onto a frame by feeding it until it reports a feature.
Tracker locked_tracker(const Frame& frame, double expected_radius) {
  TrackerConfig cfg;
  cfg.expected_radius = expected_radius;
  Tracker t(kIntr, cfg);
  for (int k = 0; k < 6; ++k)
    if (t.process(frame, k).feature) return t;
  ADD_FAILURE() << "tracker did not lock";
  return t;
}

}  // namespace

// ---------------------------------------------------------------------------

TEST(Hough, SingleDisk) {
  const auto c = adaptive_hough(disks({{320, 240, 50}}), 25, 100);
  ASSERT_FALSE(c.empty());
  int matching = 0;
  for (const auto& k : c)
    if ((k.center - Vec2(320, 240)).norm() < 2.0 && std::abs(k.radius - 50) < 3.0) ++matching;
  EXPECT_EQ(matching, 1);
  EXPECT_LE(c.size(), 32u);
}

TEST(Hough, BlankFrame) {
  EXPECT_TRUE(adaptive_hough(disks({}), 10, 100).empty());
}

TEST(Hough, ThreeDisks) {
  const std::vector<std::array<double, 3>> truth{{120, 120, 40}, {450, 150, 55}, {300, 360, 45}};
  const auto c = adaptive_hough(disks(truth), 20, 110);
  EXPECT_GE(c.size(), 3u);
  for (const auto& t : truth) {
    bool found = false;
    for (const auto& k : c) found |= (k.center - Vec2(t[0], t[1])).norm() < 2.0 && std::abs(k.radius - t[2]) < 3.0;
    EXPECT_TRUE(found) << t[0] << "," << t[1];
  }
}

TEST(Hough, RenderedTargetWithNoise) {
  SceneConfig s = target_scene();
  s.noise_sigma = 4.0;
  const double r = target_radius_px(s);
  const auto c = adaptive_hough(render_scene(s, 3), 0.5 * r, 2.0 * r);
  bool found = false;
  for (const auto& k : c) found |= (k.center - Vec2(320, 240)).norm() < 2.0 && std::abs(k.radius - r) < 3.0;
  EXPECT_TRUE(found);
}

// ---------------------------------------------------------------------------

TEST(Confidence, HandValues) {
  const IdealProjection ideal{320, 240, 50};
  EXPECT_DOUBLE_EQ(confidence_score({Vec2(320, 240), 50, 0}, ideal), 0.0);
  EXPECT_NEAR(confidence_score({Vec2(352, 240), 55, 0}, ideal), 0.2, 1e-15);
  EXPECT_NEAR(confidence_score({Vec2(288, 240), 45, 0}, ideal), 0.2, 1e-15);
  EXPECT_NEAR(confidence_score({Vec2(320, 216), 50, 0}, ideal), 0.1, 1e-15);
}

TEST(Weights, Values) {
  EXPECT_EQ(candidate_weights(1), std::vector<double>{1.0});
  const auto w3 = candidate_weights(3);
  ASSERT_EQ(w3.size(), 3u);
  EXPECT_NEAR(w3[0], 1.0 / 6, 1e-15);
  EXPECT_NEAR(w3[1], 2.0 / 6, 1e-15);
  EXPECT_NEAR(w3[2], 3.0 / 6, 1e-15);
  for (int n = 1; n <= 200; n += 7) {
    double sum = 0;
    for (double v : candidate_weights(n)) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

// ---------------------------------------------------------------------------

TEST(DecisionMatrix, Initialization) {
  const DecisionMatrix d = init_decision_matrix(kIntr, 40.0, 2.5);
  EXPECT_EQ(d.width, 640);
  EXPECT_EQ(d.height, 480);
  EXPECT_DOUBLE_EQ(d.at(320, 240), 1.0);
  EXPECT_DOUBLE_EQ(*std::max_element(d.grid.begin(), d.grid.end()), 1.0);
  EXPECT_NEAR(d.at(360, 240), std::exp(-0.5), 1e-12);
  EXPECT_NEAR(d.at(320, 200), std::exp(-0.5), 1e-12);
  for (int dx : {1, 17, 100, 300}) EXPECT_EQ(d.at(320 + dx, 240), d.at(320 - dx, 240));
  EXPECT_THROW(init_decision_matrix(kIntr, 0.0, 2.5), Error);
}

TEST(DecisionMatrix, EmptyUpdateLeavesGridUnchanged) {
  const DecisionMatrix d = init_decision_matrix(kIntr, 40.0, 2.5);
  const DecisionMatrix u = update_decision_matrix(d, {}, d.ideal());
  EXPECT_EQ(u.grid, d.grid);
}

TEST(DecisionMatrix, SingleKernelPeaksAtCandidate) {
  DecisionMatrix d = init_decision_matrix(kIntr, 40.0, 2.5);
  std::fill(d.grid.begin(), d.grid.end(), 0.0);
  const CircleCandidate c{Vec2(200, 300), 30, 0};
  const DecisionMatrix u = update_decision_matrix(d, std::span(&c, 1), IdealProjection{320, 240, 40});
  EXPECT_DOUBLE_EQ(u.at(200, 300), 1.0);
  for (int y = 0; y < u.height; ++y)
    for (int x = 0; x < u.width; ++x)
      if (x != 200 || y != 300) {
        ASSERT_LT(u.at(x, y), 1.0);
      }
  EXPECT_NEAR(u.at(230, 300), std::exp(-0.5), 1e-12);
  EXPECT_EQ(u.at(200 + 91, 300), 0.0);  // beyond 3 r
}

TEST(DecisionMatrix, RepeatedCandidateAccumulates) {
  const DecisionMatrix d0 = init_decision_matrix(kIntr, 40.0, 2.5);
  const CircleCandidate c{Vec2(350, 250), 40, 0};
  DecisionMatrix d = d0;
  for (int k = 1; k <= 6; ++k) {
    d = update_decision_matrix(std::move(d), std::span(&c, 1), d0.ideal());
    EXPECT_NEAR(d.at(350, 250), d0.at(350, 250) + k, 1e-12);
    EXPECT_EQ(d.cycles_since_reset, k);
  }
}

TEST(DecisionMatrix, BestCandidateGetsLargestWeight) {
  DecisionMatrix d = init_decision_matrix(kIntr, 40.0, 2.5);
  std::fill(d.grid.begin(), d.grid.end(), 0.0);
  const std::vector<CircleCandidate> c{{Vec2(100, 100), 10, 0}, {Vec2(322, 240), 40, 0}, {Vec2(500, 400), 20, 0}};
  const DecisionMatrix u = update_decision_matrix(d, c, d.ideal());
  EXPECT_NEAR(u.at(322, 240), 3.0 / 6, 1e-12);
  EXPECT_NEAR(u.at(100, 100), 1.0 / 6, 1e-12);
  EXPECT_NEAR(u.at(500, 400), 2.0 / 6, 1e-12);
}

TEST(TrySelect, ThresholdAndCycles) {
  const double T = calibrated_threshold(1);
  const CircleCandidate c{Vec2(321, 239), 47, 0};
  DecisionMatrix d = init_decision_matrix(kIntr, 47.0, T);
  EXPECT_FALSE(try_select(d, {}).has_value());
  int selected_at = 0;
  for (int k = 1; k <= 5 && !selected_at; ++k) {
    d = update_decision_matrix(std::move(d), std::span(&c, 1), d.ideal());
    if (try_select(d, std::span(&c, 1))) selected_at = k;
  }
  EXPECT_GE(selected_at, 2);
  EXPECT_LE(selected_at, 5);

  DecisionMatrix zero = init_decision_matrix(kIntr, 47.0, 0.0);
  zero = update_decision_matrix(std::move(zero), std::span(&c, 1), zero.ideal());
  EXPECT_TRUE(try_select(zero, std::span(&c, 1)).has_value());
}

TEST(TrySelect, PicksHighestDecisionValue) {
  DecisionMatrix d = init_decision_matrix(kIntr, 40.0, 0.5);
  const std::vector<CircleCandidate> c{{Vec2(500, 100), 40, 0}, {Vec2(330, 245), 40, 0}};
  const auto s = try_select(d, c);
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(s->center, Vec2(330, 245));
}

// ---------------------------------------------------------------------------

TEST(Boundary, SquarePerimeter) {
  Frame f(200, 200);
  for (int y = 50; y < 150; ++y)
    for (int x = 50; x < 150; ++x) f.at(x, y) = 220;
  const auto b = extract_boundary(f, {Vec2(100, 100), 90});
  ASSERT_FALSE(b.empty());
  EXPECT_EQ(b.front().points.size(), 396u);
  EXPECT_EQ(b.front().chain.size(), b.front().points.size());
  // Chain codes step between consecutive points.
  const int dx[8] = {1, 1, 0, -1, -1, -1, 0, 1}, dy[8] = {0, -1, -1, -1, 0, 1, 1, 1};
  const auto& p = b.front().points;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& q = p[(i + 1) % p.size()];
    const int c = b.front().chain[i];
    EXPECT_EQ(q.x() - p[i].x(), dx[c]);
    EXPECT_EQ(q.y() - p[i].y(), dy[c]);
  }
}

TEST(Boundary, DiskPerimeterMatchesOracle) {
  for (double r : {20.0, 47.0, 90.0}) {
    const Frame f = disks({{320, 240, r}});
    // Oracle: foreground pixels 8-adjacent to background, counted directly.
    int oracle_count = 0;
    for (int y = 1; y < f.height - 1; ++y)
      for (int x = 1; x < f.width - 1; ++x) {
        if (f.at(x, y) < 128) continue;
        bool edge = false;
        for (int k = 0; k < 4; ++k) {
          const int ox[4] = {1, -1, 0, 0}, oy[4] = {0, 0, 1, -1};
          edge |= f.at(x + ox[k], y + oy[k]) < 128;
        }
        oracle_count += edge;
      }
    const auto b = extract_boundary(f, {Vec2(320, 240), r + 30});
    EXPECT_NEAR(static_cast<double>(b.front().points.size()), oracle_count, 0.1 * oracle_count) << r;
    EXPECT_NEAR(static_cast<double>(b.front().points.size()), 4.0 * std::sqrt(2.0) * r, 0.1 * 4.0 * std::sqrt(2.0) * r);
  }
}

TEST(Boundary, LongestFirst) {
  const Frame f = disks({{200, 240, 30}, {420, 240, 60}});
  const auto b = extract_boundary(f, {Vec2(320, 240), 400});
  ASSERT_GE(b.size(), 2u);
  EXPECT_GE(b[0].points.size(), b[1].points.size());
  EXPECT_GT(b[0].points.front().x(), 320);
}

TEST(Boundary, BlankRoiThrows) {
  try {
    extract_boundary(disks({}), {Vec2(320, 240), 100});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoBoundary);
  }
}

TEST(Roi, CoversImage) {
  EXPECT_FALSE((RoiCircle{Vec2(320, 240), 399}).covers_image(640, 480));
  EXPECT_TRUE((RoiCircle{Vec2(320, 240), 400.01}).covers_image(640, 480));
}

// ---------------------------------------------------------------------------

TEST(Ransac, ExactPoints) {
  RansacConfig cfg;
  const EllipseFit fit = ransac_ellipse(ellipse_points(reference_ellipse(), 200), cfg);
  const EllipseParams e = fit.ellipse;
  EXPECT_LT((e.center - Vec2(320, 240)).norm(), 0.5);
  EXPECT_NEAR(e.semi_major, 80.0, 0.5);
  EXPECT_NEAR(e.semi_minor, 60.0, 0.5);
  EXPECT_LT(angle_diff(e.orientation, 0.3), 0.01);
  EXPECT_DOUBLE_EQ(fit.inlier_ratio, 1.0);
}

TEST(Ransac, FortyPercentOutliers) {
  int ok = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    RansacConfig cfg;
    cfg.rng_seed = seed;
    try {
      const EllipseParams e = ransac_ellipse(with_outliers(0.4, seed), cfg).ellipse;
      ok += (e.center - Vec2(320, 240)).norm() <= 2.0 && std::abs(e.semi_major - 80) <= 2.0 &&
            std::abs(e.semi_minor - 60) <= 2.0 && angle_diff(e.orientation, 0.3) <= 0.05;
    } catch (const Error&) {
    }
  }
  EXPECT_GE(ok, 95);
}

TEST(Ransac, SixtyPercentOutliersHasNoConsensus) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    RansacConfig cfg;
    cfg.rng_seed = seed;
    cfg.min_inlier_ratio = 0.5;
    try {
      ransac_ellipse(with_outliers(0.6, seed), cfg);
      ADD_FAILURE() << "seed " << seed;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::NoConsensus);
    }
  }
}

TEST(Ransac, TooFewPoints) {
  const auto pts = ellipse_points(reference_ellipse(), 4);
  try {
    ransac_ellipse(pts, RansacConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewPoints);
  }
}

TEST(Ransac, ConicHelpers) {
  const auto pts = ellipse_points(reference_ellipse(), 50);
  const auto conic = fit_ellipse_direct(pts);
  ASSERT_TRUE(conic.has_value());
  for (const auto& p : pts) EXPECT_LT(conic_distance(*conic, p), 1e-6);
  EXPECT_NEAR(conic_distance(*conic, Vec2(320 + 85 * std::cos(0.3), 240 + 85 * std::sin(0.3))), 5.0, 0.2);
  Conic hyperbola;
  hyperbola << 1, 0, -1, 0, 0, -1;
  EXPECT_THROW(conic_to_ellipse(hyperbola), Error);
}

TEST(Ransac, Deterministic) {
  RansacConfig cfg;
  cfg.rng_seed = 77;
  const auto pts = with_outliers(0.3, 5);
  const EllipseFit a = ransac_ellipse(pts, cfg), b = ransac_ellipse(pts, cfg);
  EXPECT_EQ(a.ellipse.center, b.ellipse.center);
  EXPECT_EQ(a.ellipse.semi_major, b.ellipse.semi_major);
  EXPECT_EQ(a.inliers, b.inliers);
}

// ---------------------------------------------------------------------------

TEST(TrackStep, RequiresLock) {
  DecisionMatrix d = init_decision_matrix(kIntr, 40, 2.5);
  EXPECT_THROW(track_step(TrackerState{}, disks({}), d, kIntr, TrackerConfig{}), Error);
}

TEST(TrackStep, StationaryTargetMatchesProjection) {
  SceneConfig s = target_scene();
  s.target.center = Vec3(0.03, -0.02, 0.5);
  const EllipseParams truth = project_sphere(s.target);
  const Vec2 truth_px = kIntr.normalized_to_pixel(truth.center);
  const Frame frame = render_scene(s);
  Tracker t = locked_tracker(frame, target_radius_px(s));
  for (int k = 0; k < 10; ++k) {
    const auto r = t.process(frame, 10 + k);
    ASSERT_TRUE(r.feature.has_value()) << k;
    EXPECT_LT((kIntr.normalized_to_pixel(Vec2(r.feature->xg, r.feature->yg)) - truth_px).norm(), 1.0);
  }
}

TEST(TrackStep, TeleportGrowsThenRelocks) {
  SceneConfig s = target_scene(0.8);
  const Frame start = render_scene(s);
  Tracker t = locked_tracker(start, target_radius_px(s));
  const double roi0 = t.state().roi.radius;
  s.target.center = Vec3(0.12, 0.05, 0.8);  // ~88 px right, 37 px down
  const Frame moved = render_scene(s);
  const Vec2 truth_px = kIntr.normalized_to_pixel(project_sphere(s.target).center);
  int growth = 0;
  bool relocked = false;
  for (int k = 0; k < 10 && !relocked; ++k) {
    const auto r = t.process(moved, 100 + k);
    EXPECT_FALSE(r.reset);
    EXPECT_EQ(r.phase, TrackerPhase::Tracking);
    if (r.feature) {
      relocked = true;
      EXPECT_LT((kIntr.normalized_to_pixel(Vec2(r.feature->xg, r.feature->yg)) - truth_px).norm(), 1.0);
    } else {
      ++growth;
      EXPECT_GT(t.state().roi.radius, roi0);
    }
  }
  EXPECT_TRUE(relocked);
  EXPECT_GE(growth, 1);
}

TEST(TrackStep, RemovedTargetResetsDecisionMatrix) {
  SceneConfig s = target_scene();
  Tracker t = locked_tracker(render_scene(s), target_radius_px(s));
  EXPECT_GT(t.decision_matrix().at(320, 240), 2.0);
  const Frame empty = disks({});
  double last_radius = t.state().roi.radius;
  bool reset = false;
  for (int k = 0; k < 20 && !reset; ++k) {
    TrackerState st = t.state();
    DecisionMatrix d = t.decision_matrix();
    const auto r = track_step(st, empty, d, kIntr, TrackerConfig{}, k);
    EXPECT_FALSE(r.feature.has_value());
    if (r.reset) {
      reset = true;
      EXPECT_EQ(r.state.phase, TrackerPhase::Lost);
      EXPECT_EQ(d.cycles_since_reset, 0);
      EXPECT_DOUBLE_EQ(*std::max_element(d.grid.begin(), d.grid.end()), 1.0);
    } else {
      EXPECT_NEAR(r.state.roi.radius, 1.5 * last_radius, 1e-9);
      last_radius = r.state.roi.radius;
    }
    // Step the session the same way so the state advances.
    t.process(empty, k);
  }
  EXPECT_TRUE(reset);
  EXPECT_NE(t.state().phase, TrackerPhase::Tracking);
}

TEST(TrackStep, FeatureAccuracyUnderNoise) {
  for (double sigma : {0.0, 2.0, 4.0}) {
    for (const Vec3& c : {Vec3(0, 0, 0.5), Vec3(0.06, 0.04, 0.45), Vec3(-0.05, 0.03, 0.6)}) {
      SceneConfig s = target_scene();
      s.target.center = c;
      s.noise_sigma = sigma;
      const FeatureVector truth = features_from_ellipse(project_sphere(s.target));
      Tracker t = locked_tracker(render_scene(s, 1), target_radius_px(s));
      for (std::uint64_t k = 2; k < 6; ++k) {
        const auto r = t.process(render_scene(s, k), k);
        ASSERT_TRUE(r.feature.has_value());
        const Vec2 px = kIntr.normalized_to_pixel(Vec2(r.feature->xg, r.feature->yg));
        EXPECT_LT((px - kIntr.normalized_to_pixel(Vec2(truth.xg, truth.yg))).norm(), 1.5);
        const double scale = truth.mu20 + truth.mu02;
        EXPECT_LT(std::abs(r.feature->mu20 - truth.mu20) / scale, 0.02) << sigma;
        EXPECT_LT(std::abs(r.feature->mu02 - truth.mu02) / scale, 0.02) << sigma;
        EXPECT_LT(std::abs(r.feature->mu11 - truth.mu11) / scale, 0.02) << sigma;
      }
    }
  }
}

TEST(TrackStep, PartialOcclusionStillEmits) {
  for (double q : {0.2, 0.3, 0.4}) {
    for (std::uint64_t seed : {1, 2, 3, 4}) {
      SceneConfig s = target_scene();
      SectorOccluder occ;
      occ.fraction = q;
      s.sector_occluders.push_back(occ);
      s.noise_sigma = 2.0;
      Tracker t = locked_tracker(render_scene(target_scene(), seed), target_radius_px(s));
      for (std::uint64_t k = 0; k < 10; ++k) {
        const auto r = t.process(render_scene(s, seed, k / 30.0), k);
        EXPECT_TRUE(r.feature.has_value()) << "q=" << q << " seed=" << seed << " k=" << k;
      }
    }
  }
}

TEST(TrackStep, HeavyOcclusionFailsAndResets) {
  for (double q : {0.55, 0.6, 0.7}) {
    for (std::uint64_t seed : {1, 2, 3, 4}) {
      SceneConfig s = target_scene();
      SectorOccluder occ;
      occ.fraction = q;
      s.sector_occluders.push_back(occ);
      Tracker t = locked_tracker(render_scene(target_scene(), seed), target_radius_px(s));
      const double locked_roi = t.state().roi.radius;
      bool no_consensus = false, grew = false, reset = false;
      for (std::uint64_t k = 0; k < 10 && !reset; ++k) {
        const auto r = t.process(render_scene(s, seed, k / 30.0), k);
        no_consensus |= r.failure == ErrorCode::NoConsensus;
        grew |= t.state().roi.radius > 1.4 * locked_roi;
        reset |= r.reset;
      }
      EXPECT_TRUE(no_consensus) << "q=" << q << " seed=" << seed;
      EXPECT_TRUE(grew || reset) << "q=" << q << " seed=" << seed;
      // Past 60% the partial arc never passes again, so the ROI runs out.
      if (q >= 0.6) {
        EXPECT_TRUE(reset) << "q=" << q << " seed=" << seed;
      }
    }
  }
}

// ---------------------------------------------------------------------------

TEST(TrackerSession, InitializationTakesTwoToFiveCycles) {
  SceneConfig s = target_scene();
  const Frame f = render_scene(s);
  TrackerConfig cfg;
  cfg.expected_radius = target_radius_px(s);
  Tracker t(kIntr, cfg);
  int selected_at = 0;
  for (int k = 0; k < 8 && !selected_at; ++k) {
    const auto r = t.process(f, k);
    if (r.selected_now) selected_at = t.init_cycles();
    else EXPECT_FALSE(r.feature.has_value());
  }
  EXPECT_GE(selected_at, 2);
  EXPECT_LE(selected_at, 5);
  EXPECT_EQ(t.state().phase, TrackerPhase::Tracking);
}

TEST(TrackerSession, SelectsCenteredTargetOverLargerDistractor) {
  SceneConfig s = target_scene();
  const double r = target_radius_px(s);
  // Distractor 30% larger, centered 150 px to the right at the same depth.
  s.clutter.push_back({Vec3(150.0 / kIntr.focal_px() * 0.5, 0, 0.5), 0.052});
  s.noise_sigma = 3.0;
  int correct = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    TrackerConfig cfg;
    cfg.expected_radius = r;
    cfg.ransac.rng_seed = seed;
    Tracker t(kIntr, cfg);
    for (int k = 0; k < 8; ++k) {
      const auto res = t.process(render_scene(s, seed, k / 30.0), k);
      if (res.selected_now) {
        correct += (t.state().selected_target->center - Vec2(320, 240)).norm() < 5.0;
        break;
      }
    }
  }
  EXPECT_GE(correct, 95);
}

TEST(TrackerSession, Deterministic) {
  SceneConfig s = target_scene();
  s.noise_sigma = 4.0;
  s.clutter.push_back({Vec3(0.1, 0.05, 0.6), 0.05});
  auto run = [&] {
    TrackerConfig cfg;
    cfg.expected_radius = target_radius_px(s);
    cfg.ransac.rng_seed = 9;
    Tracker t(kIntr, cfg);
    std::vector<double> out;
    for (int k = 0; k < 10; ++k) {
      const auto r = t.process(render_scene(s, 5, k / 30.0), k);
      if (r.feature) out.insert(out.end(), {r.feature->xg, r.feature->yg, r.feature->mu20, r.feature->mu11, r.feature->mu02});
      out.push_back(t.state().roi.radius);
    }
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST(TrackerSession, PixelNormalizedRoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-100.0, 800.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 p(u(rng), u(rng));
    EXPECT_LT((kIntr.normalized_to_pixel(kIntr.pixel_to_normalized(p)) - p).norm(), 1e-9);
  }
}

TEST(TrackerSession, ConfigValidation) {
  TrackerConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.roi_growth = 1.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = TrackerConfig{};
  cfg.ransac.min_inlier_ratio = 1.5;
  EXPECT_THROW(cfg.validate(), Error);
  EXPECT_STREQ(to_string(TrackerPhase::Lost), "Lost");
}
