#ifndef IBVS_IMAGING_HPP
#define IBVS_IMAGING_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ibvs/geometry.hpp"

namespace ibvs {

/// 8-bit grayscale image, row-major.
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Frame() = default;
  Frame(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
};

/// Planar convex polygon parallel to the image plane, in the camera frame.
struct ConvexPolygon {
  std::vector<Vec2> vertices;  // (X, Y) in meters at `depth`
  double depth = 0.1;          // meters along the optical axis
  double intensity = 60.0;
};

/// Occluder that hides a fixed fraction of the target's image boundary: a
/// circular sector around the projected target center, placed just in front
/// of the target and moving with it.
struct SectorOccluder {
  double fraction = 0.3;                   // of the full turn, (0, 1)
  std::optional<double> start_angle;       // image-plane radians; drawn from the seed when unset
  double intensity = 60.0;
  double depth_margin = 1.2;               // in target radii in front of the center
};

/// Piecewise-linear multiplicative gain over time; constant outside the knots.
struct IlluminationSchedule {
  std::vector<std::pair<double, double>> knots{{0.0, 1.0}};  // (t [s], gain)
  double at(double t) const;
};

struct SpecularConfig {
  bool enabled = false;
  double solid_angle = 0.15;  // sr
};

struct DiseaseConfig {
  int count = 0;
  double darkness = 0.3;        // intensity multiplier inside a patch
  double angular_radius = 0.3;  // rad on the sphere
  std::uint64_t seed = 7;
};

/// Target motion proxy: amplitude * sin(2 pi f t) plus band-limited gusts
/// (harmonics of f with seeded phases, RMS gust_sigma), along `direction`.
struct WindConfig {
  bool enabled = false;
  double amplitude = 0.01;  // m
  double frequency = 0.8;   // Hz
  double gust_sigma = 0.0;  // m
  Vec3 direction = Vec3::UnitX();
};

struct SceneConfig {
  Sphere target{Vec3(0.0, 0.0, 1.0), 0.04};  // world frame
  std::vector<Sphere> clutter;
  std::vector<ConvexPolygon> occluders;
  std::vector<SectorOccluder> sector_occluders;
  IlluminationSchedule illumination;
  SpecularConfig specular;
  DiseaseConfig disease;
  double noise_sigma = 0.0;  // intensity units
  WindConfig wind;

  Vec3 light_direction{0.3, -0.6, 0.75};  // world frame, towards the light
  double albedo = 200.0;
  double clutter_albedo = 185.0;
  double ambient = 0.6;
  double background = 35.0;
  double background_gradient = 20.0;  // added linearly from top to bottom row

  void validate() const;
};

enum class PixelLabel : std::uint8_t { Background = 0, Target = 1, Clutter = 2, Occluder = 3 };

/// Deterministic render of the scene seen from `camera_pose` (camera in world)
/// at time `t`. When `labels` is given it receives one PixelLabel per pixel.
Frame render(const SceneConfig& scene, const RigidTransform& camera_pose, const CameraIntrinsics& intr,
             double t, std::uint64_t rng_seed, std::vector<PixelLabel>* labels = nullptr);

/// World-frame displacement applied to every sphere center at time t.
Vec3 wind_displacement(const WindConfig& wind, double t, std::uint64_t rng_seed);

/// Binary mask (255 / 0) of the pixels carrying `label`.
Frame label_mask(const std::vector<PixelLabel>& labels, int width, int height, PixelLabel label);

struct RegionMoments {
  double area = 0.0;  // px^2
  Vec2 centroid = Vec2::Zero();
  double mu20 = 0.0;  // area-normalized, px^2
  double mu11 = 0.0;
  double mu02 = 0.0;
};

/// Exact discrete central moments of the nonzero pixels. Throws EmptyMask.
RegionMoments region_moments_oracle(const Frame& mask);

/// Binary PGM (P5, maxval 255). Throws IoError.
void write_pgm(const Frame& frame, const std::string& path);
Frame read_pgm(const std::string& path);

/// Seeded integer hashing shared by the renderer and the tracker.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace ibvs

#endif  // IBVS_IMAGING_HPP
