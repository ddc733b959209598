#ifndef IBVS_FEATURES_HPP
#define IBVS_FEATURES_HPP

#include <Eigen/Core>

#include "ibvs/geometry.hpp"

namespace ibvs {

using Vector5 = Eigen::Matrix<double, 5, 1>;

/// Ellipse moment features in normalized image coordinates: centroid and
/// area-normalized central second moments. Component order is
/// (xg, yg, mu20, mu11, mu02).
struct FeatureVector {
  double xg = 0.0;
  double yg = 0.0;
  double mu20 = 0.0;
  double mu11 = 0.0;
  double mu02 = 0.0;

  Vector5 as_vector() const;
  static FeatureVector from_vector(const Vector5& v);
  /// mu20 > 0, mu02 > 0 and mu20 * mu02 > mu11^2.
  bool is_valid() const;
};

struct FeatureError {
  Vector5 delta = Vector5::Zero();
  double squared_sum = 0.0;

  double norm() const { return delta.norm(); }
};

struct InteractionMatrix {
  Eigen::Matrix<double, 5, 6> rows;
  /// `rows` without the rotation-about-optical-axis column.
  Eigen::Matrix<double, 5, 5> reduced;
};

FeatureVector features_from_ellipse(const EllipseParams& e);

FeatureError feature_error(const FeatureVector& observed, const FeatureVector& desired);

/// Depth from the apparent size of a body of known diameter. Returns a
/// positive distance in meters. Throws ZeroObservedDiameter when the observed
/// diameter is below one pixel.
double depth_estimate(const CameraIntrinsics& intr, double apple_diameter_mm, double observed_diameter_px);

/// Features of the exact projection of a camera-frame sphere. Evaluated from
/// the conic shape matrix, so it is smooth in the sphere center; agrees with
/// features_from_ellipse(project_sphere(s)) up to the near-circle orientation
/// tie-break.
FeatureVector sphere_features(const Sphere& sphere_in_camera);

/// Central finite differences of the map twist -> projected sphere features.
/// Column j is (s(+h e_j) - s(-h e_j)) / 2h. Throws NotInView when any of the
/// evaluated poses does not see the whole sphere.
InteractionMatrix interaction_matrix(const Sphere& sphere_in_camera, double step = 1e-6);

}  // namespace ibvs

#endif  // IBVS_FEATURES_HPP
