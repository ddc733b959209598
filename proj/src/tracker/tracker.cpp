#include <algorithm>
#include <cmath>

#include "ibvs/tracker.hpp"

namespace ibvs {

const char* to_string(TrackerPhase phase) noexcept {
  switch (phase) {
    case TrackerPhase::Initializing: return "Initializing";
    case TrackerPhase::Tracking: return "Tracking";
    case TrackerPhase::Lost: return "Lost";
  }
  return "Unknown";
}

void TrackerConfig::validate() const {
  if (!(expected_radius > 0.0) || !(threshold >= 0.0) || !(roi_scale > 0.0) || !(roi_margin >= 0.0) ||
      !(roi_growth > 1.0) || !(min_radius_factor > 0.0) || !(max_radius_factor > min_radius_factor) ||
      hough.levels.empty() || hough.max_candidates < 1)
    throw Error(ErrorCode::InvalidArgument, "invalid tracker configuration");
  ransac.validate();
}

namespace {

// A fitted ellipse is accepted as the tracked target only when its size is
// close to the previous lock and its center stays inside the searched ROI.
constexpr double kMinRadiusRatio = 0.6;
constexpr double kMaxRadiusRatio = 1.6;
// A small sphere seen at off-axis angle theta projects to an ellipse with
// minor/major ratio close to cos(theta). Fits much flatter than that come
// from boundaries that mix the target outline with occluder edges.
constexpr double kAxisRatioTolerance = 0.85;

bool sphere_like(const EllipseParams& px, const CameraIntrinsics& intr) {
  const Vec2 n = intr.pixel_to_normalized(px.center);
  const double expected = 1.0 / std::sqrt(1.0 + n.squaredNorm());
  return px.semi_minor >= kAxisRatioTolerance * expected * px.semi_major;
}

FeatureVector pixel_ellipse_features(const EllipseParams& px, const CameraIntrinsics& intr) {
  EllipseParams n = px;
  n.center = intr.pixel_to_normalized(px.center);
  n.semi_major = px.semi_major / intr.focal_px();
  n.semi_minor = px.semi_minor / intr.focal_px();
  return features_from_ellipse(n);
}

double image_diagonal(int w, int h) { return std::hypot(static_cast<double>(w), static_cast<double>(h)); }

RoiCircle roi_around(const CircleCandidate& c, const TrackerConfig& cfg, int w, int h) {
  return {c.center, std::min(cfg.roi_scale * c.radius + cfg.roi_margin, image_diagonal(w, h))};
}

}  // namespace

TrackStepResult track_step(const TrackerState& state, const Frame& frame, DecisionMatrix& d,
                           const CameraIntrinsics& intr, const TrackerConfig& cfg, std::uint64_t frame_seed) {
  TrackStepResult out;
  out.state = state;
  if (state.phase != TrackerPhase::Tracking || !state.selected_target)
    throw Error(ErrorCode::InvalidArgument, "track_step requires a locked target");
  const CircleCandidate& last = *state.selected_target;

  try {
    const BoundaryExtraction ex = extract_boundary_detailed(frame, state.roi);
    const std::vector<Vec2> pts = boundary_edge_points(ex.boundaries.front(), ex.mask, state.roi);
    RansacConfig rc = cfg.ransac;
    rc.rng_seed = mix_seed(cfg.ransac.rng_seed, frame_seed);
    EllipseFit fit = ransac_ellipse(pts, rc);

    const double radius = 0.5 * (fit.ellipse.semi_major + fit.ellipse.semi_minor);
    const double ratio = radius / last.radius;
    if (ratio < kMinRadiusRatio || ratio > kMaxRadiusRatio || !state.roi.contains(fit.ellipse.center) ||
        !sphere_like(fit.ellipse, intr))
      throw Error(ErrorCode::NoConsensus, "fitted ellipse is inconsistent with the tracked target");

    const CircleCandidate target{fit.ellipse.center, radius, 1.0};
    const IdealProjection ideal = d.ideal();
    d = update_decision_matrix(std::move(d), std::span(&target, 1), ideal);
    out.state.selected_target = target;
    out.state.roi = roi_around(target, cfg, frame.width, frame.height);
    out.feature = pixel_ellipse_features(fit.ellipse, intr);
    out.state.last_feature = out.feature;
    out.fit = std::move(fit);
    return out;
  } catch (const Error& e) {
    out.failure = e.code();
  }

  // Algorithm: widen the search region; once it spans the whole image the
  // lock is dropped and detection starts over.
  out.state.roi.radius *= cfg.roi_growth;
  if (out.state.roi.covers_image(frame.width, frame.height)) {
    d = init_decision_matrix(intr, last.radius, cfg.threshold);
    out.state.phase = TrackerPhase::Lost;
    out.state.selected_target.reset();
    out.state.roi = {intr.principal_point, image_diagonal(frame.width, frame.height)};
    out.reset = true;
  }
  return out;
}

Tracker::Tracker(const CameraIntrinsics& intr, const TrackerConfig& cfg)
    : intr_(intr), cfg_(cfg), expected_radius_(cfg.expected_radius) {
  intr_.validate();
  cfg_.validate();
  matrix_ = init_decision_matrix(intr_, expected_radius_, cfg_.threshold);
  state_.roi = {intr_.principal_point, image_diagonal(intr_.width, intr_.height)};
}

Tracker::FrameResult Tracker::process(const Frame& frame, std::uint64_t frame_index) {
  FrameResult out;
  if (state_.phase != TrackerPhase::Tracking) {
    const double half_min = 0.5 * std::min(frame.width, frame.height);
    const double rmin = std::clamp(cfg_.min_radius_factor * expected_radius_, 4.0, half_min);
    const double rmax = std::clamp(cfg_.max_radius_factor * expected_radius_, rmin, half_min);
    out.candidates = adaptive_hough(frame, rmin, rmax, cfg_.hough);
    const IdealProjection ideal = matrix_.ideal();
    matrix_ = update_decision_matrix(std::move(matrix_), out.candidates, ideal);
    const std::optional<CircleCandidate> chosen = try_select(matrix_, out.candidates);
    if (!chosen) {
      out.phase = state_.phase;
      return out;
    }
    state_.phase = TrackerPhase::Tracking;
    state_.selected_target = chosen;
    state_.roi = roi_around(*chosen, cfg_, frame.width, frame.height);
    out.selected_now = true;
  }

  TrackStepResult step = track_step(state_, frame, matrix_, intr_, cfg_, frame_index);
  state_ = std::move(step.state);
  if (step.reset) expected_radius_ = matrix_.expected_radius;
  out.phase = state_.phase;
  out.feature = std::move(step.feature);
  out.fit = std::move(step.fit);
  out.failure = step.failure;
  out.reset = step.reset;
  return out;
}

}  // namespace ibvs
