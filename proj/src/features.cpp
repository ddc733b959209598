#include "ibvs/features.hpp"

#include <cmath>

#include "ibvs/error.hpp"

namespace ibvs {

Vector5 FeatureVector::as_vector() const {
  Vector5 v;
  v << xg, yg, mu20, mu11, mu02;
  return v;
}

FeatureVector FeatureVector::from_vector(const Vector5& v) {
  return FeatureVector{v(0), v(1), v(2), v(3), v(4)};
}

bool FeatureVector::is_valid() const {
  return std::isfinite(xg) && std::isfinite(yg) && mu20 > 0.0 && mu02 > 0.0 &&
         mu20 * mu02 - mu11 * mu11 > 0.0;
}

FeatureVector features_from_ellipse(const EllipseParams& e) {
  const double a2 = e.semi_major * e.semi_major;
  const double b2 = e.semi_minor * e.semi_minor;
  const double c = std::cos(e.orientation);
  const double s = std::sin(e.orientation);
  FeatureVector f;
  f.xg = e.center.x();
  f.yg = e.center.y();
  f.mu20 = (a2 * c * c + b2 * s * s) / 4.0;
  f.mu02 = (a2 * s * s + b2 * c * c) / 4.0;
  f.mu11 = (a2 - b2) * s * c / 4.0;
  return f;
}

FeatureError feature_error(const FeatureVector& observed, const FeatureVector& desired) {
  FeatureError e;
  e.delta = observed.as_vector() - desired.as_vector();
  for (int i = 0; i < 5; ++i) e.squared_sum += e.delta(i) * e.delta(i);
  return e;
}

double depth_estimate(const CameraIntrinsics& intr, double apple_diameter_mm, double observed_diameter_px) {
  if (!(apple_diameter_mm > 0.0))
    throw Error(ErrorCode::InvalidArgument, "apple diameter must be positive");
  if (!(observed_diameter_px >= 1.0))
    throw Error(ErrorCode::ZeroObservedDiameter, "observed diameter below one pixel");
  // f [mm] * d [mm] / (w [px] * mu [mm/px]) is in mm.
  const double z_mm = intr.focal_length_mm * apple_diameter_mm / (observed_diameter_px * intr.pixel_size_mm);
  return std::abs(z_mm) / 1000.0;
}

FeatureVector sphere_features(const Sphere& sphere) {
  const ConicShape conic = project_sphere_conic(sphere);
  // Covariance of a uniform filled ellipse x^T S x <= 1 is S^-1 / 4.
  const Eigen::Matrix2d cov = conic.shape.inverse() / 4.0;
  return FeatureVector{conic.center.x(), conic.center.y(), cov(0, 0), cov(0, 1), cov(1, 1)};
}

InteractionMatrix interaction_matrix(const Sphere& sphere, double step) {
  auto features_after = [&](int axis, double h) {
    Twist::Vector6 xi = Twist::Vector6::Zero();
    xi(axis) = h;
    // Camera moves by exp(xi); the sphere center seen from the new camera frame.
    const RigidTransform motion = se3_exp(Twist::from_vector(xi), 1.0);
    const Sphere moved{motion.inverse().apply(sphere.center), sphere.radius};
    try {
      return sphere_features(moved).as_vector();
    } catch (const Error& err) {
      throw Error(ErrorCode::NotInView, std::string("interaction matrix: ") + err.what());
    }
  };

  try {
    (void)sphere_features(sphere);
  } catch (const Error& err) {
    throw Error(ErrorCode::NotInView, std::string("interaction matrix: ") + err.what());
  }

  InteractionMatrix l;
  for (int j = 0; j < 6; ++j)
    l.rows.col(j) = (features_after(j, step) - features_after(j, -step)) / (2.0 * step);
  l.reduced = l.rows.leftCols<5>();
  return l;
}

}  // namespace ibvs
