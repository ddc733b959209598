#include "ibvs/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "ibvs/error.hpp"

namespace ibvs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in [0, 1) from the top 53 bits.
double unit_uniform(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

// Standard normal draw keyed by a hash (Box-Muller on two derived uniforms).
double unit_gaussian(std::uint64_t h) {
  const double u1 = 1.0 - unit_uniform(splitmix64(h));  // (0, 1]
  const double u2 = unit_uniform(splitmix64(h ^ 0x5bd1e9955bd1e995ULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

struct Hit {
  double depth = std::numeric_limits<double>::infinity();
  int object = -1;  // sphere index, or -(polygon index) - 2
};

struct PixelBox {
  int x0, y0, x1, y1;
};

PixelBox full_box(const CameraIntrinsics& intr) { return {0, 0, intr.width - 1, intr.height - 1}; }

// Pixel bounding box of a camera-frame sphere, padded by two pixels.
PixelBox sphere_box(const Sphere& s, const CameraIntrinsics& intr) {
  if (s.center.z() <= s.radius * 1.0001 || s.center.squaredNorm() <= s.radius * s.radius)
    return full_box(intr);
  const ConicShape conic = project_sphere_conic(s);
  const Eigen::Matrix2d inv = conic.shape.inverse();
  const double f = intr.focal_px();
  const double hx = std::sqrt(inv(0, 0)) * f + 2.0;
  const double hy = std::sqrt(inv(1, 1)) * f + 2.0;
  const Vec2 c = intr.normalized_to_pixel(conic.center);
  auto clampi = [](double v, int lo, int hi) {
    if (!(v > lo)) return lo;
    if (!(v < hi)) return hi;
    return static_cast<int>(v);
  };
  return {clampi(std::floor(c.x() - hx), 0, intr.width - 1), clampi(std::floor(c.y() - hy), 0, intr.height - 1),
          clampi(std::ceil(c.x() + hx), 0, intr.width - 1), clampi(std::ceil(c.y() + hy), 0, intr.height - 1)};
}

// Image-plane (normalized) polygon pieces of a sector occluder.
std::vector<ConvexPolygon> sector_polygons(const SectorOccluder& occ, const Sphere& target_cam,
                                           std::uint64_t rng_seed, std::size_t index) {
  std::vector<ConvexPolygon> out;
  const Vec3& c = target_cam.center;
  const double depth = c.z() - occ.depth_margin * target_cam.radius;
  if (!(depth > 1e-3) || !(occ.fraction > 0.0)) return out;
  const Vec2 apex(c.x() / c.z(), c.y() / c.z());
  const double reach = 3.0 * target_cam.radius / depth;  // well beyond the limb
  const double start = occ.start_angle
                           ? *occ.start_angle
                           : kTwoPi * unit_uniform(splitmix64(mix_seed(rng_seed, 0x5ec7 + index)));
  const double span = kTwoPi * std::min(occ.fraction, 1.0);
  const int pieces = std::max(1, static_cast<int>(std::ceil(span / (std::numbers::pi / 2))));
  const double piece_span = span / pieces;
  for (int p = 0; p < pieces; ++p) {
    ConvexPolygon poly;
    poly.depth = depth;
    poly.intensity = occ.intensity;
    poly.vertices.push_back(apex * depth);
    constexpr int kArcSteps = 8;
    for (int k = 0; k <= kArcSteps; ++k) {
      const double a = start + p * piece_span + piece_span * k / kArcSteps;
      poly.vertices.push_back((apex + reach * Vec2(std::cos(a), std::sin(a))) * depth);
    }
    out.push_back(std::move(poly));
  }
  return out;
}

// Point-in-convex-polygon for vertices in either winding order.
bool inside_convex(const std::vector<Vec2>& poly, const Vec2& p) {
  bool pos = false, neg = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    const double cross = (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
    if (cross > 0) pos = true;
    if (cross < 0) neg = true;
    if (pos && neg) return false;
  }
  return true;
}

std::vector<Vec3> disease_directions(const DiseaseConfig& d) {
  std::vector<Vec3> dirs;
  for (int i = 0; i < d.count; ++i) {
    const std::uint64_t h1 = splitmix64(mix_seed(d.seed, 2 * i));
    const std::uint64_t h2 = splitmix64(mix_seed(d.seed, 2 * i + 1));
    const double z = 2.0 * unit_uniform(h1) - 1.0;
    const double phi = kTwoPi * unit_uniform(h2);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    dirs.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  return dirs;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b + 0x632be59bd9b4e019ULL));
}

double IlluminationSchedule::at(double t) const {
  if (knots.empty()) return 1.0;
  if (t <= knots.front().first) return knots.front().second;
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (t <= knots[i].first) {
      const auto& [t0, g0] = knots[i - 1];
      const auto& [t1, g1] = knots[i];
      return t1 > t0 ? g0 + (g1 - g0) * (t - t0) / (t1 - t0) : g1;
    }
  }
  return knots.back().second;
}

void SceneConfig::validate() const {
  if (!(target.radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "target radius must be positive");
  for (const auto& s : clutter)
    if (!(s.radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "clutter radius must be positive");
  for (const auto& [t, g] : illumination.knots)
    if (!(g > 0.0)) throw Error(ErrorCode::InvalidArgument, "illumination gain must be positive");
  for (const auto& o : sector_occluders)
    if (!(o.fraction > 0.0 && o.fraction < 1.0))
      throw Error(ErrorCode::InvalidArgument, "occluded fraction must lie in (0, 1)");
  for (const auto& p : occluders)
    if (p.vertices.size() < 3 || !(p.depth > 0.0))
      throw Error(ErrorCode::InvalidArgument, "occluder polygons need >= 3 vertices and positive depth");
  if (!(noise_sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise sigma must be >= 0");
  if (!(light_direction.norm() > 0.0)) throw Error(ErrorCode::InvalidArgument, "light direction is zero");
  if (wind.enabled && (!(wind.amplitude >= 0.0) || !(wind.frequency > 0.0) || !(wind.gust_sigma >= 0.0)))
    throw Error(ErrorCode::InvalidArgument, "invalid wind parameters");
}

Vec3 wind_displacement(const WindConfig& wind, double t, std::uint64_t rng_seed) {
  if (!wind.enabled) return Vec3::Zero();
  const double w = kTwoPi * wind.frequency;
  double offset = wind.amplitude * std::sin(w * t);
  if (wind.gust_sigma > 0.0) {
    // Harmonics 2..4 of the base frequency: zero mean over every base period.
    double weights[3], phases[3], norm = 0.0;
    for (int k = 0; k < 3; ++k) {
      weights[k] = 0.25 + unit_uniform(splitmix64(mix_seed(rng_seed, 0x9057 + 2 * k)));
      phases[k] = kTwoPi * unit_uniform(splitmix64(mix_seed(rng_seed, 0x9058 + 2 * k)));
      norm += 0.5 * weights[k] * weights[k];
    }
    double gust = 0.0;
    for (int k = 0; k < 3; ++k) gust += weights[k] * std::sin((k + 2) * w * t + phases[k]);
    offset += wind.gust_sigma * gust / std::sqrt(norm);
  }
  return wind.direction.normalized() * offset;
}

Frame render(const SceneConfig& scene, const RigidTransform& camera_pose, const CameraIntrinsics& intr, double t,
             std::uint64_t rng_seed, std::vector<PixelLabel>* labels) {
  const int w = intr.width;
  const int h = intr.height;
  const double f = intr.focal_px();
  const RigidTransform world_to_cam = camera_pose.inverse();
  const Vec3 drift = wind_displacement(scene.wind, t, rng_seed);

  std::vector<Sphere> spheres;  // camera frame; index 0 is the target
  spheres.push_back({world_to_cam.apply(scene.target.center + drift), scene.target.radius});
  for (const auto& s : scene.clutter) spheres.push_back({world_to_cam.apply(s.center + drift), s.radius});

  std::vector<ConvexPolygon> polys = scene.occluders;
  for (std::size_t i = 0; i < scene.sector_occluders.size(); ++i) {
    auto pieces = sector_polygons(scene.sector_occluders[i], spheres[0], rng_seed, i);
    polys.insert(polys.end(), pieces.begin(), pieces.end());
  }

  std::vector<Hit> hits(static_cast<std::size_t>(w) * h);
  auto ray = [&](int x, int y) { return Vec3((x - intr.principal_point.x()) / f, (y - intr.principal_point.y()) / f, 1.0); };

  for (std::size_t si = 0; si < spheres.size(); ++si) {
    const Sphere& s = spheres[si];
    if (s.center.z() + s.radius <= 0.0) continue;
    const PixelBox box = sphere_box(s, intr);
    const double cc = s.center.squaredNorm() - s.radius * s.radius;
    for (int y = box.y0; y <= box.y1; ++y) {
      for (int x = box.x0; x <= box.x1; ++x) {
        const Vec3 d = ray(x, y);
        const double dd = d.squaredNorm();
        const double dc = d.dot(s.center);
        const double disc = dc * dc - dd * cc;
        if (disc < 0.0) continue;
        const double depth = (dc - std::sqrt(disc)) / dd;
        if (!(depth > 0.0)) continue;
        Hit& hit = hits[static_cast<std::size_t>(y) * w + x];
        if (depth < hit.depth) hit = {depth, static_cast<int>(si)};
      }
    }
  }

  for (std::size_t pi = 0; pi < polys.size(); ++pi) {
    const ConvexPolygon& poly = polys[pi];
    std::vector<Vec2> px;
    double x0 = w, y0 = h, x1 = -1, y1 = -1;
    for (const Vec2& v : poly.vertices) {
      const Vec2 p = intr.normalized_to_pixel(v / poly.depth);
      px.push_back(p);
      x0 = std::min(x0, p.x());
      y0 = std::min(y0, p.y());
      x1 = std::max(x1, p.x());
      y1 = std::max(y1, p.y());
    }
    const int bx0 = std::max(0, static_cast<int>(std::floor(x0)));
    const int by0 = std::max(0, static_cast<int>(std::floor(y0)));
    const int bx1 = std::min(w - 1, static_cast<int>(std::ceil(x1)));
    const int by1 = std::min(h - 1, static_cast<int>(std::ceil(y1)));
    for (int y = by0; y <= by1; ++y) {
      for (int x = bx0; x <= bx1; ++x) {
        Hit& hit = hits[static_cast<std::size_t>(y) * w + x];
        if (poly.depth < hit.depth && inside_convex(px, Vec2(x, y))) hit = {poly.depth, -static_cast<int>(pi) - 2};
      }
    }
  }

  const Vec3 light = (world_to_cam.rotation() * scene.light_direction).normalized();
  const std::vector<Vec3> patches = disease_directions(scene.disease);
  const double patch_cos = std::cos(scene.disease.angular_radius);
  const double spec_cos = 1.0 - scene.specular.solid_angle / kTwoPi;
  const double gain = scene.illumination.at(t);
  const std::uint64_t frame_key = mix_seed(rng_seed, static_cast<std::uint64_t>(std::llround(t * 1e6)));

  Frame frame(w, h);
  if (labels) labels->assign(static_cast<std::size_t>(w) * h, PixelLabel::Background);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      const Hit& hit = hits[idx];
      double value;
      PixelLabel label = PixelLabel::Background;
      if (hit.object >= 0) {
        const Sphere& s = spheres[hit.object];
        const Vec3 p = ray(x, y) * hit.depth;
        const Vec3 n = (p - s.center) / s.radius;
        const bool is_target = hit.object == 0;
        const double diffuse = std::max(0.0, n.dot(light));
        value = (is_target ? scene.albedo : scene.clutter_albedo) * (scene.ambient + (1.0 - scene.ambient) * diffuse);
        if (is_target && !patches.empty()) {
          const Vec3 n_world = camera_pose.rotation() * n;
          for (const Vec3& c : patches) {
            if (n_world.dot(c) > patch_cos) {
              value *= scene.disease.darkness;
              break;
            }
          }
        }
        if (scene.specular.enabled) {
          const Vec3 half = (light - p.normalized()).normalized();
          const double k = (n.dot(half) - spec_cos) / (1.0 - spec_cos);
          if (k > 0.0) value += (255.0 - value) * std::min(1.0, 2.0 * k);
        }
        label = is_target ? PixelLabel::Target : PixelLabel::Clutter;
      } else if (hit.object <= -2) {
        value = polys[-hit.object - 2].intensity;
        label = PixelLabel::Occluder;
      } else {
        value = scene.background + scene.background_gradient * y / h;
      }
      value *= gain;
      if (scene.noise_sigma > 0.0) value += scene.noise_sigma * unit_gaussian(mix_seed(frame_key, idx));
      frame.pixels[idx] = static_cast<std::uint8_t>(std::clamp(std::floor(value + 0.5), 0.0, 255.0));
      if (labels) (*labels)[idx] = label;
    }
  }
  return frame;
}

Frame label_mask(const std::vector<PixelLabel>& labels, int width, int height, PixelLabel label) {
  Frame mask(width, height);
  for (std::size_t i = 0; i < labels.size() && i < mask.pixels.size(); ++i)
    mask.pixels[i] = labels[i] == label ? 255 : 0;
  return mask;
}

RegionMoments region_moments_oracle(const Frame& mask) {
  double n = 0, sx = 0, sy = 0;
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (mask.at(x, y)) {
        n += 1;
        sx += x;
        sy += y;
      }
  if (n == 0) throw Error(ErrorCode::EmptyMask, "mask has no set pixels");
  RegionMoments m;
  m.area = n;
  m.centroid = Vec2(sx / n, sy / n);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (mask.at(x, y)) {
        const double dx = x - m.centroid.x();
        const double dy = y - m.centroid.y();
        m.mu20 += dx * dx;
        m.mu11 += dx * dy;
        m.mu02 += dy * dy;
      }
  m.mu20 /= n;
  m.mu11 /= n;
  m.mu02 /= n;
  return m;
}

void write_pgm(const Frame& frame, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  out << "P5\n" << frame.width << " " << frame.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.pixels.data()), static_cast<std::streamsize>(frame.pixels.size()));
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

Frame read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P5" || w <= 0 || h <= 0 || maxval != 255) throw Error(ErrorCode::IoError, path + " is not an 8-bit P5 PGM");
  in.get();
  Frame f(w, h);
  in.read(reinterpret_cast<char*>(f.pixels.data()), static_cast<std::streamsize>(f.pixels.size()));
  if (!in) throw Error(ErrorCode::IoError, "truncated PGM " + path);
  return f;
}

}  // namespace ibvs
