#ifndef IBVS_SERVO_HPP
#define IBVS_SERVO_HPP

#include "ibvs/features.hpp"
#include "ibvs/geometry.hpp"

namespace ibvs {

/// Error-dependent gain
///   lambda(x) = (l0 - linf) * exp(-slope0 * x / (l0 - linf)) + linf,
/// which is l0 at x = 0 and tends to linf for large errors. l0 == linf
/// gives a constant gain.
struct AdaptiveGain {
  double gain_at_zero = 4.0;
  double gain_at_infinity = 0.4;
  double slope_at_zero = 30.0;

  static AdaptiveGain constant(double gain) { return {gain, gain, 1.0}; }

  bool is_constant() const { return gain_at_zero == gain_at_infinity; }
  double operator()(double error_norm) const;
  void validate() const;
};

struct ServoConfig {
  double convergence_threshold = 1e-4;
  double max_linear_speed = 0.5;   // m/s
  double max_angular_speed = 1.0;  // rad/s
  double damping = 1e-3;
  int max_iterations = 600;

  void validate() const;
};

/// Simulated low-level velocity controller: components below the deadband
/// are dropped.
struct RobotSimConfig {
  double deadband_linear = 0.002;   // m/s
  double deadband_angular = 0.01;   // rad/s
  double control_period = 1.0 / 30.0;

  void validate() const;
};

/// v = -lambda(|e|) (L^T L + mu^2 I)^-1 L^T e on the 5-DOF reduced matrix,
/// then each of the linear and angular parts scaled down to its speed limit.
/// The rotation about the optical axis is always zero. Throws
/// SingularInteraction when the damped system has condition number > 1e12.
Twist compute_camera_twist(const FeatureError& e, const InteractionMatrix& l, const AdaptiveGain& gain,
                           const ServoConfig& cfg);

/// Camera twist -> robot frame, deadband, back to camera frame, integrate.
/// `pose` is the camera pose in the world frame.
struct RobotStepResult {
  RigidTransform pose;
  Twist applied_robot_twist;
};
RobotStepResult robot_step_detailed(const RigidTransform& pose, const Twist& commanded,
                                    const RigidTransform& hand_eye, const RobotSimConfig& sim);
RigidTransform robot_step(const RigidTransform& pose, const Twist& commanded, const RigidTransform& hand_eye,
                          const RobotSimConfig& sim);

bool check_convergence(const FeatureError& e, const ServoConfig& cfg);

}  // namespace ibvs

#endif  // IBVS_SERVO_HPP
