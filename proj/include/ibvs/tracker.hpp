#ifndef IBVS_TRACKER_HPP
#define IBVS_TRACKER_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ibvs/error.hpp"
#include "ibvs/features.hpp"
#include "ibvs/geometry.hpp"
#include "ibvs/imaging.hpp"

namespace ibvs {

// ---------------------------------------------------------------------------
// Circle candidates

struct CircleCandidate {
  Vec2 center = Vec2::Zero();  // px
  double radius = 0.0;         // px
  double accumulator_score = 0.0;
};

struct HoughConfig {
  /// Edge-magnitude thresholds as fractions of the strongest gradient,
  /// visited coarse to fine.
  std::vector<double> levels{0.5, 0.3, 0.18, 0.1};
  /// Fraction of the circumference that must carry aligned edge pixels.
  double min_support = 0.3;
  int max_candidates = 32;
};

/// Coarse-to-fine gradient Hough search for bright discs with radius in
/// [min_radius, max_radius]. Returns the merged candidates of all accepting
/// levels, unsorted, at most `max_candidates`.
std::vector<CircleCandidate> adaptive_hough(const Frame& frame, double min_radius, double max_radius,
                                            const HoughConfig& cfg = {});

/// Expected projection of the target: principal point and radius, in px.
struct IdealProjection {
  double x0 = 0.0;
  double y0 = 0.0;
  double r0 = 0.0;
};

/// Sum of relative deviations of position and radius; lower is better.
double confidence_score(const CircleCandidate& candidate, const IdealProjection& ideal);

/// w_i = i / (1 + ... + n) for i = 1..n (ascending).
std::vector<double> candidate_weights(int n);

// ---------------------------------------------------------------------------
// Decision matrix

struct DecisionMatrix {
  int width = 0;
  int height = 0;
  std::vector<double> grid;
  Vec2 principal_point = Vec2::Zero();
  double expected_radius = 0.0;  // r_p, px
  double threshold = 0.0;        // selection threshold T
  int cycles_since_reset = 0;

  double at(int x, int y) const { return grid[static_cast<std::size_t>(y) * width + x]; }
  /// Value at a sub-pixel location (nearest pixel, clamped to the grid).
  double sample(const Vec2& p) const;
  IdealProjection ideal() const { return {principal_point.x(), principal_point.y(), expected_radius}; }
};

/// T = 1 + 1.5 * w_max, w_max the top weight for `nominal_candidates`.
double calibrated_threshold(int nominal_candidates = 1);

/// Unit Gaussian with sigma = r_p at the principal point.
DecisionMatrix init_decision_matrix(const CameraIntrinsics& intr, double expected_radius, double threshold);

/// Adds w_i * exp(-d^2 / 2 r_i^2) (support 3 r_i) for each candidate, the
/// largest weight going to the best (lowest) confidence score.
DecisionMatrix update_decision_matrix(DecisionMatrix d, std::span<const CircleCandidate> candidates,
                                      const IdealProjection& ideal);

/// Candidate whose center has the largest D value above T (ties resolved by
/// confidence score), if any.
std::optional<CircleCandidate> try_select(const DecisionMatrix& d, std::span<const CircleCandidate> candidates);

// ---------------------------------------------------------------------------
// Boundary extraction

struct RoiCircle {
  Vec2 center = Vec2::Zero();
  double radius = 0.0;

  bool contains(const Vec2& p) const { return (p - center).squaredNorm() <= radius * radius; }
  /// True when the circle contains every image corner.
  bool covers_image(int width, int height) const;
};

/// One traced outer boundary: pixel positions in tracing order and the
/// Freeman codes (0 = +x, counting counter-clockwise on screen, 2 = up)
/// between consecutive points.
struct Boundary {
  std::vector<Eigen::Vector2i> points;
  std::vector<std::uint8_t> chain;
};

struct BoundaryExtraction {
  std::vector<Boundary> boundaries;  // longest first
  Frame mask;                        // opened foreground mask, full frame size
  double threshold = 0.0;            // Otsu level used inside the ROI
};

/// Otsu + 3x3 opening inside the ROI, then Moore tracing of every
/// 8-connected component. Throws NoBoundary when no boundary has >= 16
/// points.
BoundaryExtraction extract_boundary_detailed(const Frame& frame, const RoiCircle& roi);
std::vector<Boundary> extract_boundary(const Frame& frame, const RoiCircle& roi);

/// Edge points halfway between each boundary pixel and its background
/// 4-neighbours. Points touching the ROI rim or the image border are dropped.
std::vector<Vec2> boundary_edge_points(const Boundary& boundary, const Frame& mask, const RoiCircle& roi);

// ---------------------------------------------------------------------------
// Ellipse fitting

struct RansacConfig {
  int iterations = 200;
  double inlier_threshold = 1.5;  // px, first-order distance to the conic
  double min_inlier_ratio = 0.5;
  std::uint64_t rng_seed = 0;
  int coverage_bins = 36;

  void validate() const;
};

/// Conic a x^2 + b xy + c y^2 + d x + e y + f = 0.
using Conic = Eigen::Matrix<double, 6, 1>;

/// Direct least-squares ellipse fit (ellipse-specific constraint 4ac - b^2 = 1).
/// Returns nullopt when no ellipse solution exists.
std::optional<Conic> fit_ellipse_direct(std::span<const Vec2> points);
/// Throws InvalidArgument when the conic is not a real ellipse.
EllipseParams conic_to_ellipse(const Conic& conic);
/// First-order (Sampson) distance of `p` to the conic.
double conic_distance(const Conic& conic, const Vec2& p);

struct EllipseFit {
  EllipseParams ellipse;  // in the units of the input points
  std::vector<bool> inliers;
  double inlier_ratio = 0.0;  // inliers / points
  double coverage = 0.0;      // occupied angular bins around the ellipse

  /// The ratio compared against min_inlier_ratio.
  double support() const { return std::min(inlier_ratio, coverage); }
};

/// Throws TooFewPoints (< 5) or NoConsensus (support below min_inlier_ratio).
EllipseFit ransac_ellipse(std::span<const Vec2> points, const RansacConfig& cfg);

// ---------------------------------------------------------------------------
// Tracking

enum class TrackerPhase { Initializing, Tracking, Lost };
const char* to_string(TrackerPhase phase) noexcept;

struct TrackerState {
  TrackerPhase phase = TrackerPhase::Initializing;
  RoiCircle roi;
  std::optional<CircleCandidate> selected_target;  // present iff Tracking
  std::optional<FeatureVector> last_feature;
};

struct TrackerConfig {
  double expected_radius = 40.0;  // px, initial r_p
  double threshold = calibrated_threshold(1);
  HoughConfig hough;
  RansacConfig ransac;
  double roi_scale = 1.4;    // ROI radius = roi_scale * r_s + roi_margin
  double roi_margin = 12.0;  // px
  double roi_growth = 1.5;
  double min_radius_factor = 0.5;  // Hough radius range relative to r_p
  double max_radius_factor = 2.0;

  void validate() const;
};

struct TrackStepResult {
  TrackerState state;
  std::optional<FeatureVector> feature;  // normalized image coordinates
  std::optional<EllipseFit> fit;         // pixel coordinates
  std::optional<ErrorCode> failure;
  bool reset = false;
};

/// One tracking iteration inside the ROI of a locked target. `d` is updated
/// on success and re-initialized when the ROI outgrows the image.
TrackStepResult track_step(const TrackerState& state, const Frame& frame, DecisionMatrix& d,
                           const CameraIntrinsics& intr, const TrackerConfig& cfg, std::uint64_t frame_seed = 0);

/// Detection-and-tracking session: Hough + decision-matrix initialization
/// until a target is selected, then ROI tracking with growth and reset.
class Tracker {
 public:
  struct FrameResult {
    TrackerPhase phase = TrackerPhase::Initializing;
    std::optional<FeatureVector> feature;
    std::optional<EllipseFit> fit;
    std::optional<ErrorCode> failure;
    std::vector<CircleCandidate> candidates;  // Hough output, initialization frames only
    bool selected_now = false;
    bool reset = false;
  };

  Tracker(const CameraIntrinsics& intr, const TrackerConfig& cfg);

  FrameResult process(const Frame& frame, std::uint64_t frame_index);

  const TrackerState& state() const { return state_; }
  const DecisionMatrix& decision_matrix() const { return matrix_; }
  /// Update cycles spent in the current initialization.
  int init_cycles() const { return matrix_.cycles_since_reset; }

 private:
  CameraIntrinsics intr_;
  TrackerConfig cfg_;
  TrackerState state_;
  DecisionMatrix matrix_;
  double expected_radius_;
};

}  // namespace ibvs

#endif  // IBVS_TRACKER_HPP
