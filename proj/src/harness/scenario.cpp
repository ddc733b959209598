#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "ibvs/harness.hpp"

namespace ibvs {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

void expect_object(const json& j, const std::string& where) {
  if (!j.is_object()) config_error(where + ": expected an object");
}

// Unknown keys are rejected so that typos do not silently fall back to defaults.
void allow_keys(const json& j, const std::string& where, std::initializer_list<std::string_view> keys) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (std::string_view k : keys) known = known || item.key() == k;
    if (!known) config_error(where + ": unknown key '" + item.key() + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(where + "." + key + ": wrong type");
  }
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) config_error(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) config_error(where + ": not finite");
  return v;
}

void read_number(const json& j, const char* key, double& out, const std::string& where) {
  if (j.contains(key)) out = number(j.at(key), where + "." + key);
}

Vec3 vec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) config_error(where + ": expected [x, y, z]");
  return {number(j[0], where), number(j[1], where), number(j[2], where)};
}

Vec2 vec2(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) config_error(where + ": expected [x, y]");
  return {number(j[0], where), number(j[1], where)};
}

void read_vec3(const json& j, const char* key, Vec3& out, const std::string& where) {
  if (j.contains(key)) out = vec3(j.at(key), where + "." + key);
}

Mat3 rotation_xyz(const Vec3& angles) {
  return (Eigen::AngleAxisd(angles.x(), Vec3::UnitX()) * Eigen::AngleAxisd(angles.y(), Vec3::UnitY()) *
          Eigen::AngleAxisd(angles.z(), Vec3::UnitZ()))
      .toRotationMatrix();
}

Sphere sphere(const json& j, const std::string& where) {
  expect_object(j, where);
  allow_keys(j, where, {"center", "radius"});
  Sphere s;
  if (!j.contains("center") || !j.contains("radius")) config_error(where + ": needs center and radius");
  s.center = vec3(j.at("center"), where + ".center");
  s.radius = number(j.at("radius"), where + ".radius");
  return s;
}

CameraIntrinsics camera(const json& j) {
  const std::string w = "camera";
  expect_object(j, w);
  allow_keys(j, w, {"focal_length_mm", "pixel_size_mm", "principal_point", "width", "height"});
  CameraIntrinsics c;
  read_number(j, "focal_length_mm", c.focal_length_mm, w);
  read_number(j, "pixel_size_mm", c.pixel_size_mm, w);
  if (j.contains("principal_point")) c.principal_point = vec2(j.at("principal_point"), w + ".principal_point");
  read(j, "width", c.width, w);
  read(j, "height", c.height, w);
  return c;
}

RigidTransform hand_eye(const json& j) {
  const std::string w = "hand_eye";
  expect_object(j, w);
  allow_keys(j, w, {"rotation_xyz", "translation"});
  Vec3 angles = Vec3::Zero(), t = Vec3::Zero();
  read_vec3(j, "rotation_xyz", angles, w);
  read_vec3(j, "translation", t, w);
  return {rotation_xyz(angles), t};
}

SceneConfig scene(const json& j) {
  const std::string w = "scene";
  expect_object(j, w);
  allow_keys(j, w,
             {"target", "clutter", "occluders", "sector_occluders", "illumination", "specular", "disease",
              "noise_sigma", "wind", "light_direction", "albedo", "clutter_albedo", "ambient", "background",
              "background_gradient"});
  SceneConfig s;
  if (!j.contains("target")) config_error(w + ": missing 'target'");
  s.target = sphere(j.at("target"), w + ".target");
  if (j.contains("clutter")) {
    if (!j.at("clutter").is_array()) config_error(w + ".clutter: expected an array");
    for (const json& c : j.at("clutter")) s.clutter.push_back(sphere(c, w + ".clutter[]"));
  }
  if (j.contains("occluders")) {
    if (!j.at("occluders").is_array()) config_error(w + ".occluders: expected an array");
    for (const json& o : j.at("occluders")) {
      const std::string ow = w + ".occluders[]";
      expect_object(o, ow);
      allow_keys(o, ow, {"vertices", "depth", "intensity"});
      ConvexPolygon p;
      if (!o.contains("vertices") || !o.at("vertices").is_array()) config_error(ow + ": needs vertices");
      for (const json& v : o.at("vertices")) p.vertices.push_back(vec2(v, ow + ".vertices"));
      read_number(o, "depth", p.depth, ow);
      read_number(o, "intensity", p.intensity, ow);
      s.occluders.push_back(std::move(p));
    }
  }
  if (j.contains("sector_occluders")) {
    if (!j.at("sector_occluders").is_array()) config_error(w + ".sector_occluders: expected an array");
    for (const json& o : j.at("sector_occluders")) {
      const std::string ow = w + ".sector_occluders[]";
      expect_object(o, ow);
      allow_keys(o, ow, {"fraction", "start_angle", "intensity", "depth_margin"});
      SectorOccluder q;
      read_number(o, "fraction", q.fraction, ow);
      if (o.contains("start_angle")) q.start_angle = number(o.at("start_angle"), ow + ".start_angle");
      read_number(o, "intensity", q.intensity, ow);
      read_number(o, "depth_margin", q.depth_margin, ow);
      s.sector_occluders.push_back(q);
    }
  }
  if (j.contains("illumination")) {
    const json& il = j.at("illumination");
    if (!il.is_array() || il.empty()) config_error(w + ".illumination: expected [[t, gain], ...]");
    s.illumination.knots.clear();
    for (const json& k : il) {
      const Vec2 tg = vec2(k, w + ".illumination");
      s.illumination.knots.emplace_back(tg.x(), tg.y());
    }
  }
  if (j.contains("specular")) {
    const json& sp = j.at("specular");
    expect_object(sp, w + ".specular");
    allow_keys(sp, w + ".specular", {"enabled", "solid_angle"});
    read(sp, "enabled", s.specular.enabled, w + ".specular");
    read_number(sp, "solid_angle", s.specular.solid_angle, w + ".specular");
  }
  if (j.contains("disease")) {
    const json& d = j.at("disease");
    expect_object(d, w + ".disease");
    allow_keys(d, w + ".disease", {"count", "darkness", "angular_radius", "seed"});
    read(d, "count", s.disease.count, w + ".disease");
    read_number(d, "darkness", s.disease.darkness, w + ".disease");
    read_number(d, "angular_radius", s.disease.angular_radius, w + ".disease");
    read(d, "seed", s.disease.seed, w + ".disease");
  }
  read_number(j, "noise_sigma", s.noise_sigma, w);
  if (j.contains("wind")) {
    const json& wd = j.at("wind");
    const std::string ww = w + ".wind";
    expect_object(wd, ww);
    allow_keys(wd, ww, {"enabled", "amplitude", "frequency", "gust_sigma", "direction"});
    s.wind.enabled = true;
    read(wd, "enabled", s.wind.enabled, ww);
    read_number(wd, "amplitude", s.wind.amplitude, ww);
    read_number(wd, "frequency", s.wind.frequency, ww);
    read_number(wd, "gust_sigma", s.wind.gust_sigma, ww);
    read_vec3(wd, "direction", s.wind.direction, ww);
  }
  read_vec3(j, "light_direction", s.light_direction, w);
  read_number(j, "albedo", s.albedo, w);
  read_number(j, "clutter_albedo", s.clutter_albedo, w);
  read_number(j, "ambient", s.ambient, w);
  read_number(j, "background", s.background, w);
  read_number(j, "background_gradient", s.background_gradient, w);
  return s;
}

void servo(const json& j, ServoConfig& c) {
  const std::string w = "servo";
  expect_object(j, w);
  allow_keys(j, w, {"convergence_threshold", "max_linear_speed", "max_angular_speed", "damping", "max_iterations"});
  read_number(j, "convergence_threshold", c.convergence_threshold, w);
  read_number(j, "max_linear_speed", c.max_linear_speed, w);
  read_number(j, "max_angular_speed", c.max_angular_speed, w);
  read_number(j, "damping", c.damping, w);
  read(j, "max_iterations", c.max_iterations, w);
}

void robot(const json& j, RobotSimConfig& c) {
  const std::string w = "robot";
  expect_object(j, w);
  allow_keys(j, w, {"deadband_linear", "deadband_angular", "control_period"});
  read_number(j, "deadband_linear", c.deadband_linear, w);
  read_number(j, "deadband_angular", c.deadband_angular, w);
  read_number(j, "control_period", c.control_period, w);
}

void gain(const json& j, AdaptiveGain& g) {
  const std::string w = "gain";
  expect_object(j, w);
  allow_keys(j, w, {"constant", "gain_at_zero", "gain_at_infinity", "slope_at_zero"});
  if (j.contains("constant")) {
    if (j.contains("gain_at_zero") || j.contains("gain_at_infinity") || j.contains("slope_at_zero"))
      config_error(w + ": 'constant' excludes the adaptive parameters");
    g = AdaptiveGain::constant(number(j.at("constant"), w + ".constant"));
    return;
  }
  read_number(j, "gain_at_zero", g.gain_at_zero, w);
  read_number(j, "gain_at_infinity", g.gain_at_infinity, w);
  read_number(j, "slope_at_zero", g.slope_at_zero, w);
}

void ransac(const json& j, RansacConfig& r) {
  const std::string w = "ransac";
  expect_object(j, w);
  allow_keys(j, w, {"iterations", "inlier_threshold", "min_inlier_ratio", "seed", "coverage_bins"});
  read(j, "iterations", r.iterations, w);
  read_number(j, "inlier_threshold", r.inlier_threshold, w);
  read_number(j, "min_inlier_ratio", r.min_inlier_ratio, w);
  read(j, "seed", r.rng_seed, w);
  read(j, "coverage_bins", r.coverage_bins, w);
}

void tracker(const json& j, Scenario& s) {
  const std::string w = "tracker";
  expect_object(j, w);
  allow_keys(j, w,
             {"expected_radius", "threshold", "hough_levels", "hough_min_support", "max_candidates", "roi_scale",
              "roi_margin", "roi_growth", "min_radius_factor", "max_radius_factor"});
  TrackerConfig& t = s.tracker;
  if (j.contains("expected_radius")) {
    t.expected_radius = number(j.at("expected_radius"), w + ".expected_radius");
    s.tracker_radius_from_config = true;
  }
  read_number(j, "threshold", t.threshold, w);
  read(j, "hough_levels", t.hough.levels, w);
  read_number(j, "hough_min_support", t.hough.min_support, w);
  read(j, "max_candidates", t.hough.max_candidates, w);
  read_number(j, "roi_scale", t.roi_scale, w);
  read_number(j, "roi_margin", t.roi_margin, w);
  read_number(j, "roi_growth", t.roi_growth, w);
  read_number(j, "min_radius_factor", t.min_radius_factor, w);
  read_number(j, "max_radius_factor", t.max_radius_factor, w);
}

}  // namespace

void Scenario::validate() const {
  try {
    camera.validate();
    scene.validate();
    servo.validate();
    robot.validate();
    gain.validate();
    tracker.validate();
  } catch (const Error& e) {
    config_error("scenario '" + name + "': " + e.what());
  }
  if (name.empty()) config_error("scenario name is empty");
  if (!(max_duration > 0.0)) config_error("max_duration must be positive");
  if (!(goal_standoff > scene.target.radius)) config_error("goal_standoff must exceed the target radius");
  if (!(approach_direction.norm() > 1e-9)) config_error("approach_direction must be nonzero");
  if (!(initial_offset.norm() > scene.target.radius)) config_error("initial camera position is inside the target");
}

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(std::string("scenario is not valid JSON: ") + e.what());
  }
  expect_object(j, "scenario");
  allow_keys(j, "scenario",
             {"name", "seed", "max_duration", "goal_standoff", "camera", "hand_eye", "scene", "approach_direction",
              "initial_offset", "angular_offset", "servo", "robot", "gain", "ransac", "tracker", "description"});
  Scenario s;
  read(j, "name", s.name, "scenario");
  read(j, "seed", s.rng_seed, "scenario");
  read_number(j, "max_duration", s.max_duration, "scenario");
  read_number(j, "goal_standoff", s.goal_standoff, "scenario");
  if (j.contains("camera")) s.camera = camera(j.at("camera"));
  if (j.contains("hand_eye")) {
    try {
      s.hand_eye = hand_eye(j.at("hand_eye"));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ConfigError) throw;
      config_error(std::string("hand_eye: ") + e.what());
    }
  }
  if (!j.contains("scene")) config_error("scenario: missing 'scene'");
  s.scene = scene(j.at("scene"));
  read_vec3(j, "approach_direction", s.approach_direction, "scenario");
  read_vec3(j, "initial_offset", s.initial_offset, "scenario");
  read_vec3(j, "angular_offset", s.angular_offset, "scenario");
  if (j.contains("servo")) servo(j.at("servo"), s.servo);
  if (j.contains("robot")) robot(j.at("robot"), s.robot);
  if (j.contains("gain")) gain(j.at("gain"), s.gain);
  if (j.contains("tracker")) tracker(j.at("tracker"), s);
  if (j.contains("ransac")) ransac(j.at("ransac"), s.tracker.ransac);
  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open scenario file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

RigidTransform initial_camera_pose(const Scenario& s) {
  const RigidTransform goal = goal_camera_pose(s);
  const RigidTransform placed(goal.rotation(), s.scene.target.center + s.initial_offset);
  return placed * RigidTransform(rotation_xyz(s.angular_offset), Vec3::Zero());
}

RigidTransform goal_camera_pose(const Scenario& s) {
  const Sphere& target = s.scene.target;
  const Vec3 dir = s.approach_direction.normalized();
  return initial_view_pose(target, target.center + target.radius * dir, s.goal_standoff - target.radius);
}

FeatureVector desired_features(const Scenario& s) {
  const RigidTransform goal = goal_camera_pose(s);
  const Sphere in_camera{goal.inverse().apply(s.scene.target.center), s.scene.target.radius};
  return features_from_ellipse(project_sphere(in_camera));
}

}  // namespace ibvs
