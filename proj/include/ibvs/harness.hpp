#ifndef IBVS_HARNESS_HPP
#define IBVS_HARNESS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ibvs/features.hpp"
#include "ibvs/geometry.hpp"
#include "ibvs/imaging.hpp"
#include "ibvs/servo.hpp"
#include "ibvs/tracker.hpp"

namespace ibvs {

struct Scenario {
  std::string name;
  std::uint64_t rng_seed = 1;
  double max_duration = 20.0;  // s
  double goal_standoff = 0.15;  // m, camera to target center at the goal
  CameraIntrinsics camera;
  RigidTransform hand_eye = RigidTransform::from_translation(Vec3(0.0, 0.0, 0.1));
  SceneConfig scene;
  /// Goal viewing direction, from the target center towards the camera (world).
  Vec3 approach_direction{0.0, -1.0, 0.0};
  /// Initial camera position relative to the target center (world, m). The
  /// camera starts with the goal orientation.
  Vec3 initial_offset{0.0, -0.5, 0.0};
  /// Extra camera rotation about its own x, y, z axes (rad) at the start.
  Vec3 angular_offset = Vec3::Zero();
  ServoConfig servo;
  RobotSimConfig robot;
  AdaptiveGain gain;
  TrackerConfig tracker;
  /// When false the tracker's expected radius is predicted from the initial pose.
  bool tracker_radius_from_config = false;

  /// Throws ConfigError.
  void validate() const;
};

/// Throws ConfigError (malformed or invalid content) or IoError.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text);

RigidTransform initial_camera_pose(const Scenario& s);
RigidTransform goal_camera_pose(const Scenario& s);
/// Features of the target seen from the goal pose.
FeatureVector desired_features(const Scenario& s);

enum class Outcome { Converged, Timeout, TrackLostUnrecovered };
const char* to_string(Outcome outcome) noexcept;

struct TraceRecord {
  int iteration = 0;
  double time = 0.0;
  std::optional<FeatureVector> observed;  // absent while the tracker has no lock
  FeatureVector desired;
  double error_squared = 0.0;  // NaN without an observation
  Twist commanded;             // camera frame
  Twist applied;               // robot frame, after the deadband
  RigidTransform pose;         // camera in world, before the step
  TrackerPhase phase = TrackerPhase::Initializing;
  std::optional<double> ransac_inlier_ratio;
  std::optional<ErrorCode> tracker_failure;
  bool tracker_reset = false;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<int> max_iterations;
  /// Per-frame PGM dumps (camera frame and decision matrix) go here when set.
  std::optional<std::string> frame_dir;
  /// Features straight from the analytic projection instead of the renderer
  /// and tracker.
  bool analytic_features = false;
};

struct RunResult {
  std::string scenario;
  Outcome outcome = Outcome::Timeout;
  std::vector<TraceRecord> trace;
  int iterations = 0;
  double final_error = 0.0;  // last observed squared error, NaN if none
  double wall_time_s = 0.0;
  std::uint64_t seed = 0;
  int tracker_resets = 0;
};

/// Closed loop at the robot control period: render, track, estimate depth,
/// servo, step the robot. Stops on convergence, timeout (max_duration or
/// max_iterations) or more than `kMaxLostFrames` consecutive frames without a
/// feature after the first lock.
constexpr int kMaxLostFrames = 60;
RunResult run_scenario(const Scenario& scenario, const RunOptions& options = {});

/// CSV with one row per trace record, floats at 9 significant digits.
std::string trace_csv(const std::vector<TraceRecord>& trace);
void write_trace_csv(const std::vector<TraceRecord>& trace, const std::string& path);
std::string summary_json(const RunResult& result);
void write_summary_json(const RunResult& result, const std::string& path);

}  // namespace ibvs

#endif  // IBVS_HARNESS_HPP
