#include "ibvs/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ibvs/error.hpp"

namespace ibvs {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::CameraInsideSphere: return "CameraInsideSphere";
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::DegenerateNormal: return "DegenerateNormal";
    case ErrorCode::ZeroObservedDiameter: return "ZeroObservedDiameter";
    case ErrorCode::NotInView: return "NotInView";
    case ErrorCode::SingularInteraction: return "SingularInteraction";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::NoBoundary: return "NoBoundary";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::NoConsensus: return "NoConsensus";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).norm();
  if (!(ortho < 1e-9) || !(rotation.determinant() > 0.0) || !translation.allFinite()) {
    std::ostringstream msg;
    msg << "rotation is not orthonormal (|R^T R - I| = " << ortho << ")";
    throw Error(ErrorCode::InvalidArgument, msg.str());
  }
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform out;
  out.rotation_ = rotation_.transpose();
  out.translation_ = -(out.rotation_ * translation_);
  return out;
}

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
  RigidTransform out;
  out.rotation_ = rotation_ * rhs.rotation_;
  out.translation_ = rotation_ * rhs.translation_ + translation_;
  return out;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) { return a * b; }
RigidTransform inverse(const RigidTransform& t) { return t.inverse(); }

Twist::Vector6 Twist::as_vector() const {
  Vector6 v;
  v << linear, angular;
  return v;
}

Twist Twist::from_vector(const Vector6& v) {
  return Twist{v.head<3>(), v.tail<3>()};
}

bool Twist::is_finite() const { return linear.allFinite() && angular.allFinite(); }

void CameraIntrinsics::validate() const {
  if (!(focal_length_mm > 0.0) || !(pixel_size_mm > 0.0))
    throw Error(ErrorCode::InvalidArgument, "focal length and pixel size must be positive");
  if (width <= 0 || height <= 0)
    throw Error(ErrorCode::InvalidArgument, "image size must be positive");
  if (!(principal_point.x() >= 0.0 && principal_point.x() < width &&
        principal_point.y() >= 0.0 && principal_point.y() < height))
    throw Error(ErrorCode::InvalidArgument, "principal point outside the image");
}

Mat3 skew(const Vec3& v) {
  Mat3 s;
  // clang-format off
  s <<    0.0, -v.z(),  v.y(),
        v.z(),    0.0, -v.x(),
       -v.y(),  v.x(),    0.0;
  // clang-format on
  return s;
}

ConicShape project_sphere_conic(const Sphere& sphere) {
  const Vec3& o = sphere.center;
  const double r = sphere.radius;
  if (!(r > 0.0) || !o.allFinite())
    throw Error(ErrorCode::InvalidArgument, "sphere radius must be positive");
  // Limb cone: (x X0 + y Y0 + Z0)^2 = K (x^2 + y^2 + 1), i.e. conic O O^T - K I.
  const double k = o.squaredNorm() - r * r;
  if (k <= 0.0) throw Error(ErrorCode::CameraInsideSphere, "camera lies inside the sphere");
  // The tangent cone stays in Z > 0 exactly when Z0 > R.
  if (o.z() <= r) throw Error(ErrorCode::BehindCamera, "sphere limb crosses the image plane");

  const Mat3 m = o * o.transpose() - k * Mat3::Identity();
  const Eigen::Matrix2d a = m.topLeftCorner<2, 2>();
  const Vec2 b = m.topRightCorner<2, 1>();
  const double c = m(2, 2);

  ConicShape out;
  out.center = -a.inverse() * b;
  const double at_center = c + b.dot(out.center);
  if (!(at_center > 0.0)) throw Error(ErrorCode::BehindCamera, "degenerate sphere projection");
  out.shape = a / (-at_center);
  return out;
}

EllipseParams project_sphere(const Sphere& sphere) {
  const ConicShape conic = project_sphere_conic(sphere);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(conic.shape);
  const Vec2 values = eig.eigenvalues();  // ascending
  if (!(values(0) > 0.0)) throw Error(ErrorCode::BehindCamera, "projection is not an ellipse");

  EllipseParams e;
  e.center = conic.center;
  e.semi_major = 1.0 / std::sqrt(values(0));
  e.semi_minor = 1.0 / std::sqrt(values(1));
  if ((e.semi_major - e.semi_minor) / e.semi_major < 1e-6) {
    e.orientation = 0.0;
  } else {
    const Vec2 axis = eig.eigenvectors().col(0);
    double alpha = std::atan2(axis.y(), axis.x());
    if (alpha <= -std::numbers::pi / 2) alpha += std::numbers::pi;
    if (alpha > std::numbers::pi / 2) alpha -= std::numbers::pi;
    e.orientation = alpha;
  }
  return e;
}

RigidTransform initial_view_pose(const Sphere& sphere, const Vec3& inspect_point, double standoff) {
  if (!(standoff > 0.0)) throw Error(ErrorCode::InvalidArgument, "standoff must be positive");
  const Vec3 outward = inspect_point - sphere.center;
  const double len = outward.norm();
  if (!(len >= 1e-9)) throw Error(ErrorCode::DegenerateNormal, "inspect point coincides with sphere center");
  const Vec3 n = outward / len;

  const Vec3 z_axis = -n;
  Vec3 x_axis = z_axis.cross(Vec3::UnitZ());
  if (x_axis.norm() < 1e-9) {
    // Looking straight up or down: align x with world x.
    x_axis = Vec3::UnitX() - Vec3::UnitX().dot(z_axis) * z_axis;
  }
  x_axis.normalize();
  const Vec3 y_axis = z_axis.cross(x_axis);

  Mat3 rot;
  rot.col(0) = x_axis;
  rot.col(1) = y_axis;
  rot.col(2) = z_axis;
  return RigidTransform(rot, inspect_point + standoff * n);
}

Twist twist_camera_to_robot(const Twist& v, const RigidTransform& hand_eye) {
  const Mat3& rot = hand_eye.rotation();
  const Vec3 angular = rot * v.angular;
  return Twist{rot * v.linear + skew(hand_eye.translation()) * angular, angular};
}

RigidTransform se3_exp(const Twist& twist, double dt) {
  const Vec3 w = twist.angular * dt;
  const Vec3 u = twist.linear * dt;
  const double theta = w.norm();
  const Mat3 wx = skew(w);
  const Mat3 wx2 = wx * wx;

  double a, b, c;  // sin(t)/t, (1-cos t)/t^2, (t - sin t)/t^3
  if (theta < 1e-5) {
    const double t2 = theta * theta;
    a = 1.0 - t2 / 6.0;
    b = 0.5 - t2 / 24.0;
    c = 1.0 / 6.0 - t2 / 120.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / (theta * theta);
    c = (theta - std::sin(theta)) / (theta * theta * theta);
  }
  const Mat3 rot = Mat3::Identity() + a * wx + b * wx2;
  const Mat3 v = Mat3::Identity() + b * wx + c * wx2;
  // Project onto SO(3) so the constructor invariant holds.
  const Mat3 clean = Eigen::Quaterniond(rot).normalized().toRotationMatrix();
  return RigidTransform(clean, v * u);
}

RigidTransform integrate_twist(const RigidTransform& pose, const Twist& twist, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  const RigidTransform moved = pose * se3_exp(twist, dt);
  const Mat3 clean = Eigen::Quaterniond(moved.rotation()).normalized().toRotationMatrix();
  return RigidTransform(clean, moved.translation());
}

}  // namespace ibvs
