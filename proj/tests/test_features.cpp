#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "ibvs/error.hpp"
#include "ibvs/features.hpp"
#include "oracles.hpp"

using namespace ibvs;

namespace {

EllipseParams ellipse(double x, double y, double a, double b, double alpha) {
  EllipseParams e;
  e.center = {x, y};
  e.semi_major = a;
  e.semi_minor = b;
  e.orientation = alpha;
  return e;
}

// Centered sphere at depth z: exact rates of the centroid under lateral
// translation and rotation, from x_g = X Z / (Z^2 - R^2).
double exact_translation_entry(double z, double r) { return -z / (z * z - r * r); }
double exact_rotation_entry(double z, double r) { return -z * z / (z * z - r * r); }

}  // namespace

TEST(FeaturesFromEllipse, CircleMomentsMatchPixelSums) {
  const double r = 120.0;
  const oracle::Moments m = oracle::moments(oracle::raster_ellipse(320.3, 240.6, r, r, 0.0, 640, 480));
  for (double alpha : {0.0, 0.4, -1.2}) {
    const FeatureVector f = features_from_ellipse(ellipse(0, 0, r, r, alpha));
    EXPECT_NEAR(f.mu20, r * r / 4, 1e-9);
    EXPECT_NEAR(f.mu02, r * r / 4, 1e-9);
    EXPECT_EQ(f.mu11, 0.0);
    EXPECT_LT(std::abs(m.cov(0, 0) / f.mu20 - 1.0), 0.005);
    EXPECT_LT(std::abs(m.cov(1, 1) / f.mu02 - 1.0), 0.005);
  }
}

TEST(FeaturesFromEllipse, AxisAlignedIntegral) {
  const FeatureVector f = features_from_ellipse(ellipse(0.1, -0.2, 2.0, 1.0, 0.0));
  EXPECT_DOUBLE_EQ(f.xg, 0.1);
  EXPECT_DOUBLE_EQ(f.yg, -0.2);
  EXPECT_NEAR(f.mu20, 1.0, 1e-15);
  EXPECT_NEAR(f.mu11, 0.0, 1e-15);
  EXPECT_NEAR(f.mu02, 0.25, 1e-15);
}

TEST(FeaturesFromEllipse, OrientationPeriodicity) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ua(-1.5, 1.5);
  for (int i = 0; i < 50; ++i) {
    const double alpha = ua(rng);
    const Vector5 a = features_from_ellipse(ellipse(0.01, 0.02, 0.3, 0.2, alpha)).as_vector();
    const Vector5 b = features_from_ellipse(ellipse(0.01, 0.02, 0.3, 0.2, alpha + std::numbers::pi)).as_vector();
    EXPECT_LT((a - b).norm(), 1e-15);
  }
}

TEST(FeaturesFromEllipse, RotatedEllipseMatchesPixelSums) {
  const oracle::Moments m = oracle::moments(oracle::raster_ellipse(300, 250, 110, 60, 0.5, 640, 480));
  const FeatureVector f = features_from_ellipse(ellipse(300, 250, 110, 60, 0.5));
  EXPECT_LT(std::abs(m.cov(0, 0) / f.mu20 - 1.0), 0.01);
  EXPECT_LT(std::abs(m.cov(1, 1) / f.mu02 - 1.0), 0.01);
  EXPECT_LT(std::abs(m.cov(0, 1) / f.mu11 - 1.0), 0.01);
  EXPECT_TRUE(f.is_valid());
}

TEST(FeatureError, Basics) {
  const FeatureVector s = features_from_ellipse(ellipse(0.1, 0.2, 0.3, 0.2, 0.1));
  const FeatureError zero = feature_error(s, s);
  EXPECT_EQ(zero.squared_sum, 0.0);
  EXPECT_EQ(zero.delta, Vector5::Zero());

  FeatureVector shifted = s;
  shifted.xg += 0.1;
  EXPECT_NEAR(feature_error(shifted, s).squared_sum, 0.01, 1e-15);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 100; ++i) {
    Vector5 a, b;
    for (int k = 0; k < 5; ++k) {
      a(k) = u(rng);
      b(k) = u(rng);
    }
    const FeatureError ab = feature_error(FeatureVector::from_vector(a), FeatureVector::from_vector(b));
    const FeatureError ba = feature_error(FeatureVector::from_vector(b), FeatureVector::from_vector(a));
    EXPECT_EQ(ab.squared_sum, ba.squared_sum);
    double sum = 0;
    for (int k = 0; k < 5; ++k) sum += ab.delta(k) * ab.delta(k);
    EXPECT_EQ(ab.squared_sum, sum);
  }
}

TEST(DepthEstimate, DirectEvaluation) {
  CameraIntrinsics intr;
  intr.focal_length_mm = 4.0;
  intr.pixel_size_mm = 0.008;
  // 4 mm * 80 mm / (100 px * 0.008 mm/px) = 400 mm.
  EXPECT_NEAR(depth_estimate(intr, 80.0, 100.0), 0.4, 1e-12);
  EXPECT_NEAR(depth_estimate(intr, 80.0, 200.0), 0.2, 1e-12);
  try {
    depth_estimate(intr, 80.0, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroObservedDiameter);
  }
}

TEST(DepthEstimate, ApparentSizeOfSphere) {
  // The limb of a sphere spans 2 R / sqrt(Z^2 - R^2) in normalized units, so the
  // estimate is sqrt(Z^2 - R^2): within 2% once Z exceeds 7 R.
  const CameraIntrinsics intr;
  const double r = 0.04;
  for (double z = 7 * r; z < 2.0; z += 0.05) {
    const EllipseParams e = project_sphere({Vec3(0, 0, z), r});
    const double w = 2 * e.semi_major * intr.focal_px();
    const double est = depth_estimate(intr, 2000 * r, w);
    EXPECT_NEAR(est, std::sqrt(z * z - r * r), 1e-9);
    EXPECT_LT(std::abs(est / z - 1.0), 0.02);
  }
}

TEST(InteractionMatrix, ReducedDropsRollColumn) {
  const InteractionMatrix l = interaction_matrix({Vec3(0.05, -0.03, 0.6), 0.04});
  for (int c = 0; c < 5; ++c) EXPECT_EQ(l.reduced.col(c), l.rows.col(c));
}

TEST(InteractionMatrix, PointFeatureLimitAtCenter) {
  // A small sphere behaves like a point: xdot = -vx / Z - wy at x = y = 0.
  for (double z : {0.3, 0.5, 1.0}) {
    const InteractionMatrix l = interaction_matrix({Vec3(0, 0, z), 0.005 * z});
    EXPECT_LT(std::abs(l.rows(0, 0) / (-1.0 / z) - 1.0), 1e-4);
    EXPECT_LT(std::abs(l.rows(0, 4) / -1.0 - 1.0), 1e-4);
    EXPECT_LT(std::abs(l.rows(1, 1) / (-1.0 / z) - 1.0), 1e-4);
    EXPECT_LT(std::abs(l.rows(1, 3) / 1.0 - 1.0), 1e-4);
  }
}

TEST(InteractionMatrix, ExactSphereEntriesAtCenter) {
  const double z = 0.5, r = 0.04;
  const InteractionMatrix l = interaction_matrix({Vec3(0, 0, z), r});
  EXPECT_LT(std::abs(l.rows(0, 0) / exact_translation_entry(z, r) - 1.0), 1e-6);
  EXPECT_LT(std::abs(l.rows(0, 4) / exact_rotation_entry(z, r) - 1.0), 1e-6);
  // A coarser step agrees.
  const InteractionMatrix coarse = interaction_matrix({Vec3(0, 0, z), r}, 1e-4);
  EXPECT_LT((coarse.rows - l.rows).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(InteractionMatrix, SecondOrderStepConvergence) {
  const double z = 0.5, r = 0.04;
  const double exact = exact_rotation_entry(z, r);
  // Off-center to make the truncation error visible in every column.
  const Sphere s{Vec3(0.08, 0.05, z), r};
  const InteractionMatrix fine = interaction_matrix(s, 1e-6);
  for (double h : {2e-2, 1e-2}) {
    const double e1 = (interaction_matrix(s, h).rows - fine.rows).norm();
    const double e2 = (interaction_matrix(s, h / 2).rows - fine.rows).norm();
    EXPECT_NEAR(e1 / e2, 4.0, 0.4) << "h=" << h;
  }
  // The centroid is linear in lateral translation, so use the rotation entry.
  const double c1 = interaction_matrix({Vec3(0, 0, z), r}, 2e-2).rows(0, 4) - exact;
  const double c2 = interaction_matrix({Vec3(0, 0, z), r}, 1e-2).rows(0, 4) - exact;
  EXPECT_NEAR(c1 / c2, 4.0, 0.4);
}

TEST(InteractionMatrix, RankIsThreeForASphere) {
  // Moments of a sphere's image depend only on its 3-D center.
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (int i = 0; i < 20; ++i) {
    const InteractionMatrix l = interaction_matrix({Vec3(u(rng), u(rng), 0.5 + u(rng)), 0.04});
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(l.reduced));
    const auto& sv = svd.singularValues();
    EXPECT_GT(sv(2) / sv(0), 1e-4);
    EXPECT_LT(sv(3) / sv(0), 1e-7);
  }
}

TEST(InteractionMatrix, CenteredViewSymmetries) {
  const InteractionMatrix l = interaction_matrix({Vec3(0, 0, 0.5), 0.04});
  // Axial motion cannot create orientation.
  EXPECT_LT(std::abs(l.rows(3, 2)), 1e-6);
  // Lateral translation leaves the area term unchanged to first order.
  for (int c : {0, 1}) EXPECT_LT(std::abs(l.rows(2, c) + l.rows(4, c)), 1e-6);
}

TEST(InteractionMatrix, NotInView) {
  try {
    interaction_matrix({Vec3(0, 0, 0.04 + 1e-7), 0.04});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotInView);
  }
}

TEST(SphereFeatures, AgreeWithEllipsePath) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (int i = 0; i < 100; ++i) {
    const Sphere s{Vec3(u(rng), u(rng), 0.6 + u(rng)), 0.04};
    const Vector5 a = sphere_features(s).as_vector();
    const Vector5 b = features_from_ellipse(project_sphere(s)).as_vector();
    EXPECT_LT((a - b).norm(), 1e-12);
  }
}
