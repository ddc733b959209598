#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "ibvs/harness.hpp"

namespace ibvs {

const char* to_string(Outcome outcome) noexcept {
  switch (outcome) {
    case Outcome::Converged: return "Converged";
    case Outcome::Timeout: return "Timeout";
    case Outcome::TrackLostUnrecovered: return "TrackLostUnrecovered";
  }
  return "Unknown";
}

namespace {

Sphere target_in_camera(const Scenario& s, const RigidTransform& pose, double t, std::uint64_t seed) {
  const Vec3 world = s.scene.target.center + wind_displacement(s.scene.wind, t, seed);
  return {pose.inverse().apply(world), s.scene.target.radius};
}

// Whole projected contour inside the image.
void require_initial_view(const Scenario& s, const RigidTransform& pose, std::uint64_t seed) {
  EllipseParams e;
  try {
    e = project_sphere(target_in_camera(s, pose, 0.0, seed));
  } catch (const Error& err) {
    throw Error(ErrorCode::ConfigError, "scenario '" + s.name + "': target not in the initial view (" + err.what() + ")");
  }
  const CameraIntrinsics& c = s.camera;
  const Vec2 center = c.normalized_to_pixel(e.center);
  const double f = c.focal_px();
  const double ca = std::cos(e.orientation), sa = std::sin(e.orientation);
  const double hx = f * std::sqrt(e.semi_major * e.semi_major * ca * ca + e.semi_minor * e.semi_minor * sa * sa);
  const double hy = f * std::sqrt(e.semi_major * e.semi_major * sa * sa + e.semi_minor * e.semi_minor * ca * ca);
  if (center.x() - hx < 0.0 || center.y() - hy < 0.0 || center.x() + hx > c.width - 1 ||
      center.y() + hy > c.height - 1)
    throw Error(ErrorCode::ConfigError, "scenario '" + s.name + "': target not fully inside the initial view");
}

Frame decision_image(const DecisionMatrix& d) {
  Frame out(d.width, d.height);
  const double peak = *std::max_element(d.grid.begin(), d.grid.end());
  if (!(peak > 0.0)) return out;
  for (std::size_t i = 0; i < d.grid.size(); ++i)
    out.pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 * d.grid[i] / peak));
  return out;
}

std::string numbered(const std::string& dir, const char* stem, int k) {
  char name[64];
  std::snprintf(name, sizeof name, "%s_%05d.pgm", stem, k);
  return (std::filesystem::path(dir) / name).string();
}

}  // namespace

RunResult run_scenario(const Scenario& s, const RunOptions& opt) {
  const auto started = std::chrono::steady_clock::now();
  s.validate();
  RunResult result;
  result.scenario = s.name;
  result.seed = opt.seed.value_or(s.rng_seed);
  result.final_error = std::numeric_limits<double>::quiet_NaN();  // until the first observation
  const std::uint64_t seed = result.seed;

  const double dt = s.robot.control_period;
  const int max_iterations = opt.max_iterations.value_or(s.servo.max_iterations);
  if (max_iterations < 1) throw Error(ErrorCode::ConfigError, "max_iterations must be positive");
  const int limit = std::min(max_iterations, static_cast<int>(std::floor(s.max_duration / dt + 1e-9)));

  RigidTransform pose = initial_camera_pose(s);
  require_initial_view(s, pose, seed);
  const FeatureVector desired = desired_features(s);

  TrackerConfig tcfg = s.tracker;
  if (!s.tracker_radius_from_config) {
    const EllipseParams e = project_sphere(target_in_camera(s, pose, 0.0, seed));
    tcfg.expected_radius = 0.5 * (e.semi_major + e.semi_minor) * s.camera.focal_px();
  }
  tcfg.ransac.rng_seed = mix_seed(tcfg.ransac.rng_seed, seed);
  Tracker tracker(s.camera, tcfg);

  if (opt.frame_dir) std::filesystem::create_directories(*opt.frame_dir);

  const double apple_diameter_mm = 2000.0 * s.scene.target.radius;
  bool locked_once = false;
  int frames_without_feature = 0;
  result.outcome = Outcome::Timeout;

  for (int k = 0; k < limit; ++k) {
    const double t = k * dt;
    TraceRecord rec;
    rec.iteration = k;
    rec.time = t;
    rec.desired = desired;
    rec.pose = pose;
    rec.error_squared = std::numeric_limits<double>::quiet_NaN();

    std::optional<FeatureVector> feature;
    std::optional<Sphere> proxy;
    if (opt.analytic_features) {
      rec.phase = TrackerPhase::Tracking;
      try {
        const Sphere cam = target_in_camera(s, pose, t, seed);
        feature = features_from_ellipse(project_sphere(cam));
        proxy = cam;
      } catch (const Error&) {
        rec.phase = TrackerPhase::Lost;
      }
    } else {
      const std::uint64_t frame_seed = mix_seed(seed, static_cast<std::uint64_t>(k));
      const Frame frame = render(s.scene, pose, s.camera, t, frame_seed);
      Tracker::FrameResult fr = tracker.process(frame, frame_seed);
      rec.phase = fr.phase;
      rec.tracker_failure = fr.failure;
      rec.tracker_reset = fr.reset;
      if (fr.reset) ++result.tracker_resets;
      if (fr.selected_now) locked_once = true;
      if (fr.fit) rec.ransac_inlier_ratio = fr.fit->inlier_ratio;
      if (fr.feature && fr.fit) {
        try {
          const double width_px = fr.fit->ellipse.semi_major + fr.fit->ellipse.semi_minor;
          const double z = depth_estimate(s.camera, apple_diameter_mm, width_px);
          feature = fr.feature;
          proxy = Sphere{Vec3(feature->xg * z, feature->yg * z, z), s.scene.target.radius};
        } catch (const Error&) {
          feature.reset();
        }
      }
      if (opt.frame_dir) {
        write_pgm(frame, numbered(*opt.frame_dir, "frame", k));
        write_pgm(decision_image(tracker.decision_matrix()), numbered(*opt.frame_dir, "decision", k));
      }
    }

    Twist command;
    if (feature) {
      locked_once = true;
      frames_without_feature = 0;
      const FeatureError e = feature_error(*feature, desired);
      rec.observed = feature;
      rec.error_squared = e.squared_sum;
      result.final_error = e.squared_sum;
      if (check_convergence(e, s.servo)) {
        rec.applied = twist_camera_to_robot(Twist{}, s.hand_eye);
        result.trace.push_back(rec);
        result.outcome = Outcome::Converged;
        break;
      }
      try {
        command = compute_camera_twist(e, interaction_matrix(*proxy), s.gain, s.servo);
      } catch (const Error&) {
        command = Twist{};  // hold still on an unusable Jacobian
      }
    } else if (locked_once && ++frames_without_feature > kMaxLostFrames) {
      result.trace.push_back(rec);
      result.outcome = Outcome::TrackLostUnrecovered;
      break;
    }

    const RobotStepResult step = robot_step_detailed(pose, command, s.hand_eye, s.robot);
    rec.commanded = command;
    rec.applied = step.applied_robot_twist;
    result.trace.push_back(rec);
    pose = step.pose;
  }

  result.iterations = static_cast<int>(result.trace.size());
  result.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace ibvs
