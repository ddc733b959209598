#ifndef IBVS_GEOMETRY_HPP
#define IBVS_GEOMETRY_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace ibvs {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Pose of a child frame in a parent frame: p_parent = rotation * p_child + translation.
class RigidTransform {
 public:
  RigidTransform() = default;
  /// Throws InvalidArgument unless `rotation` is a proper rotation (within 1e-9).
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Vec3& t) { return {Mat3::Identity(), t}; }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  RigidTransform inverse() const;
  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  RigidTransform operator*(const RigidTransform& rhs) const;

 private:
  Mat3 rotation_ = Mat3::Identity();
  Vec3 translation_ = Vec3::Zero();
};

RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform inverse(const RigidTransform& t);

struct Twist {
  Vec3 linear = Vec3::Zero();   // m/s
  Vec3 angular = Vec3::Zero();  // rad/s

  using Vector6 = Eigen::Matrix<double, 6, 1>;
  Vector6 as_vector() const;
  static Twist from_vector(const Vector6& v);
  bool is_finite() const;
};

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};

/// Pinhole camera without distortion. Square pixels.
struct CameraIntrinsics {
  double focal_length_mm = 4.7;
  double pixel_size_mm = 0.008;
  Vec2 principal_point{320.0, 240.0};
  int width = 640;
  int height = 480;

  double focal_px() const { return focal_length_mm / pixel_size_mm; }
  /// Throws InvalidArgument when the invariants do not hold.
  void validate() const;

  Vec2 pixel_to_normalized(const Vec2& px) const {
    return (px - principal_point) / focal_px();
  }
  Vec2 normalized_to_pixel(const Vec2& xy) const {
    return xy * focal_px() + principal_point;
  }
};

/// Ellipse in normalized image coordinates. `orientation` is the angle of the
/// major axis with the image x-axis, in (-pi/2, pi/2].
struct EllipseParams {
  Vec2 center = Vec2::Zero();
  double semi_major = 0.0;
  double semi_minor = 0.0;
  double orientation = 0.0;
};

Mat3 skew(const Vec3& v);

/// Projection of the sphere's occluding contour. The sphere is given in the
/// camera frame. Throws CameraInsideSphere or BehindCamera.
EllipseParams project_sphere(const Sphere& sphere_in_camera);

/// Shape matrix S (2x2, symmetric positive definite) and center c of the
/// projected contour, (x - c)^T S (x - c) = 1. Same preconditions and errors as
/// project_sphere; smooth in the sphere center, which the finite-difference
/// Jacobian relies on.
struct ConicShape {
  Vec2 center;
  Eigen::Matrix2d shape;
};
ConicShape project_sphere_conic(const Sphere& sphere_in_camera);

/// Camera pose (camera in world) at distance `standoff` from `inspect_point`
/// along the outward surface normal, optical axis pointing at the sphere and
/// camera x-axis horizontal (world z is up). Throws DegenerateNormal.
RigidTransform initial_view_pose(const Sphere& sphere, const Vec3& inspect_point, double standoff);

/// Maps a camera-frame twist into the robot (end-effector) frame given the
/// hand-eye transform (camera pose in the robot frame).
Twist twist_camera_to_robot(const Twist& camera_twist, const RigidTransform& hand_eye);

/// pose * exp(dt * twist) with the twist expressed in the body frame.
RigidTransform integrate_twist(const RigidTransform& pose, const Twist& twist, double dt);

/// Closed-form SE(3) exponential of a body twist applied for `dt`.
RigidTransform se3_exp(const Twist& twist, double dt);

}  // namespace ibvs

#endif  // IBVS_GEOMETRY_HPP
