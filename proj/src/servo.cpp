#include "ibvs/servo.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "ibvs/error.hpp"

namespace ibvs {

double AdaptiveGain::operator()(double x) const {
  if (is_constant()) return gain_at_zero;
  const double span = gain_at_zero - gain_at_infinity;
  return span * std::exp(-slope_at_zero * x / span) + gain_at_infinity;
}

void AdaptiveGain::validate() const {
  if (!(gain_at_infinity > 0.0) || !(gain_at_zero >= gain_at_infinity) || !(slope_at_zero > 0.0))
    throw Error(ErrorCode::InvalidArgument, "adaptive gain requires l0 >= linf > 0 and slope > 0");
}

void ServoConfig::validate() const {
  if (!(convergence_threshold > 0.0) || !(max_linear_speed > 0.0) || !(max_angular_speed > 0.0) ||
      !(damping >= 0.0) || max_iterations <= 0)
    throw Error(ErrorCode::InvalidArgument, "servo configuration values must be positive");
}

void RobotSimConfig::validate() const {
  if (!(deadband_linear >= 0.0) || !(deadband_angular >= 0.0) || !(control_period > 0.0))
    throw Error(ErrorCode::InvalidArgument, "deadbands must be >= 0 and the control period > 0");
}

namespace {

Vec3 clamp_norm(const Vec3& v, double limit) {
  const double n = v.norm();
  return n > limit ? Vec3(v * (limit / n)) : v;
}

}  // namespace

Twist compute_camera_twist(const FeatureError& e, const InteractionMatrix& l, const AdaptiveGain& gain,
                           const ServoConfig& cfg) {
  if (!e.delta.allFinite() || !l.reduced.allFinite())
    throw Error(ErrorCode::InvalidArgument, "non-finite feature error or interaction matrix");

  using Mat5 = Eigen::Matrix<double, 5, 5>;
  const Mat5 normal = l.reduced.transpose() * l.reduced + cfg.damping * cfg.damping * Mat5::Identity();
  const Eigen::SelfAdjointEigenSolver<Mat5> eig(normal, Eigen::EigenvaluesOnly);
  const Vector5& ev = eig.eigenvalues();  // ascending
  const double cond = ev(0) > 0.0 ? ev(4) / ev(0) : INFINITY;
  if (!(cond <= 1e12)) {
    std::ostringstream msg;
    msg << "damped interaction system is singular (condition " << cond << ")";
    throw Error(ErrorCode::SingularInteraction, msg.str());
  }

  const double lambda = gain(e.norm());
  const Vector5 v5 = -lambda * normal.ldlt().solve(l.reduced.transpose() * e.delta);

  Twist t;
  t.linear = clamp_norm(v5.head<3>(), cfg.max_linear_speed);
  t.angular = clamp_norm(Vec3(v5(3), v5(4), 0.0), cfg.max_angular_speed);
  return t;
}

RobotStepResult robot_step_detailed(const RigidTransform& pose, const Twist& commanded,
                                    const RigidTransform& hand_eye, const RobotSimConfig& sim) {
  Twist robot = twist_camera_to_robot(commanded, hand_eye);
  for (int i = 0; i < 3; ++i) {
    if (std::abs(robot.linear(i)) < sim.deadband_linear) robot.linear(i) = 0.0;
    if (std::abs(robot.angular(i)) < sim.deadband_angular) robot.angular(i) = 0.0;
  }
  const Twist camera = twist_camera_to_robot(robot, hand_eye.inverse());
  return {integrate_twist(pose, camera, sim.control_period), robot};
}

RigidTransform robot_step(const RigidTransform& pose, const Twist& commanded, const RigidTransform& hand_eye,
                          const RobotSimConfig& sim) {
  return robot_step_detailed(pose, commanded, hand_eye, sim).pose;
}

bool check_convergence(const FeatureError& e, const ServoConfig& cfg) {
  return e.squared_sum < cfg.convergence_threshold;
}

}  // namespace ibvs
