#include "ionet/so3.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include "ionet/error.hpp"
#include "ionet/rng.hpp"
#include "oracles.hpp"

namespace ionet {
namespace {

using so3::rodrigues_increment;
constexpr double kPi = std::numbers::pi;

double max_abs(const Mat3& m) { return m.cwiseAbs().maxCoeff(); }

TEST(Rodrigues, ZeroRateIsIdentity) {
  EXPECT_EQ(rodrigues_increment(Vec3::Zero(), 0.01), Mat3::Identity());
}

TEST(Rodrigues, QuarterTurnAboutZ) {
  const Mat3 r = rodrigues_increment(Vec3(0, 0, kPi / 2), 1.0);
  EXPECT_LE((r * Vec3::UnitX() - Vec3::UnitY()).norm(), 1e-15);
}

TEST(Rodrigues, MatchesQuaternionOracle) {
  const Vec3 w(0.3, -0.2, 0.1);
  EXPECT_LE(max_abs(rodrigues_increment(w, 0.01) - testing::quaternion_exp_rotation(w * 0.01)), 1e-12);
}

TEST(Rodrigues, MatchesQuaternionOracleOverRandomDraws) {
  Rng rng(42);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    Vec3 axis(rng.normal(), rng.normal(), rng.normal());
    axis.normalize();
    const double angle = rng.uniform(0.0, 3.0);
    const double dt = rng.uniform(0.001, 0.1);
    const Vec3 w = axis * (angle / dt);
    worst = std::max(worst, max_abs(rodrigues_increment(w, dt) - testing::quaternion_exp_rotation(w * dt)));
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(Rodrigues, InverseRateUndoesRotation) {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    Vec3 w(rng.normal(), rng.normal(), rng.normal());
    w *= rng.uniform(0.0, 3.1) / w.norm();
    EXPECT_LE(max_abs(rodrigues_increment(w, 1.0) * rodrigues_increment(-w, 1.0) - Mat3::Identity()), 1e-12);
  }
}

TEST(Rodrigues, SmallAngleBranchIsContinuous) {
  const Vec3 sigma = Vec3(0.6, -0.8, 0.0) * 1e-10;
  const Mat3 first_order = Mat3::Identity() + so3::skew(sigma);
  EXPECT_LE(max_abs(rodrigues_increment(sigma, 1.0) - first_order), 1e-18);
  // Either side of the branch switch agree to O(σ²).
  const Vec3 axis = Vec3(1, 2, 3).normalized();
  const Mat3 below = rodrigues_increment(axis * (so3::kSmallAngle * 0.999), 1.0);
  const Mat3 above = rodrigues_increment(axis * (so3::kSmallAngle * 1.001), 1.0);
  EXPECT_LE(max_abs(below - above), 1e-10);
}

TEST(Rodrigues, RejectsBadInput) {
  EXPECT_THROW(rodrigues_increment(Vec3(NAN, 0, 0), 0.01), Error);
  EXPECT_THROW(rodrigues_increment(Vec3::Zero(), 0.0), Error);
  try {
    rodrigues_increment(Vec3(INFINITY, 0, 0), 0.01);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidInput);
  }
}

TEST(RotationLog, InvertsRodrigues) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    Vec3 sigma(rng.normal(), rng.normal(), rng.normal());
    sigma *= rng.uniform(0.0, 3.0) / sigma.norm();
    EXPECT_LE((so3::rotation_log(rodrigues_increment(sigma, 1.0)) - sigma).norm(), 1e-11);
  }
  const Vec3 tiny(1e-12, -2e-12, 3e-12);
  EXPECT_LE((so3::rotation_log(rodrigues_increment(tiny, 1.0)) - tiny).norm(), 1e-24);
}

TEST(RotationLog, HalfTurnIsAliased) {
  try {
    so3::rotation_log(so3::rot_z(kPi));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kAliasing);
  }
}

TEST(UpdateAttitude, Composition) {
  EXPECT_EQ(so3::update_attitude(Mat3::Identity(), Mat3::Identity()), Mat3::Identity());
  const Mat3 r = so3::update_attitude(so3::rot_z(kPi / 6), so3::rot_z(kPi / 3));
  EXPECT_LE(max_abs(r - so3::rot_z(kPi / 2)), 1e-12);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Mat3 c = testing::random_rotation(seed);
    const Mat3 omega = testing::random_rotation(seed + 1000);
    EXPECT_LE(so3::orthogonality_error(so3::update_attitude(c, omega)), 1e-12);
  }
}

TEST(Reorthonormalize, ExactRotationUnchanged) {
  const Mat3 r = testing::random_rotation(11);
  EXPECT_LE(max_abs(so3::reorthonormalize(r) - r), 1e-14);
}

TEST(Reorthonormalize, ProjectsPerturbedMatrix) {
  Rng rng(5);
  Mat3 noisy = testing::random_rotation(12);
  for (int i = 0; i < 9; ++i) noisy(i / 3, i % 3) += 1e-6 * rng.normal();
  const Mat3 r = so3::reorthonormalize(noisy);
  EXPECT_LE(so3::orthogonality_error(r), 1e-14);
  EXPECT_NEAR(r.determinant(), 1.0, 1e-14);
  EXPECT_LE(max_abs(r - noisy), 1e-5);
}

TEST(Reorthonormalize, RejectsFarMatrices) {
  Mat3 m = Mat3::Identity();
  m(0, 1) = 0.1;
  try {
    so3::reorthonormalize(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerate);
  }
  EXPECT_THROW(so3::reorthonormalize(-Mat3::Identity()), Error);
}

TEST(Reorthonormalize, LongNoisyIntegrationStaysOrthogonal) {
  Rng rng(9);
  Mat3 c = Mat3::Identity();
  double worst = 0.0;
  for (int k = 1; k <= 100000; ++k) {
    const Vec3 w(rng.normal(), rng.normal(), rng.normal());
    // Raw product, re-projected every 256 steps like the strapdown loop.
    c = c * rodrigues_increment(w, 0.01);
    if (k % 256 == 0) c = so3::reorthonormalize(c);
    worst = std::max(worst, so3::orthogonality_error(c));
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(Yaw, BasicValues) {
  EXPECT_EQ(so3::yaw_of(Mat3::Identity()), 0.0);
  EXPECT_NEAR(so3::yaw_of(so3::rot_z(kPi / 2)), kPi / 2, 1e-15);
  EXPECT_NEAR(so3::yaw_of(so3::rot_z(kPi)), kPi, 1e-15);
}

TEST(Yaw, RollDoesNotChangeHeading) {
  Rng rng(21);
  for (int i = 0; i < 1000; ++i) {
    const double theta = rng.uniform(-kPi, kPi);
    const Mat3 c = so3::rot_z(theta) * so3::rot_x(5.0 * kPi / 180.0);
    // Oracle: azimuth of the first column.
    const double direct = std::atan2(c(1, 0), c(0, 0));
    EXPECT_NEAR(so3::yaw_of(c), direct, 1e-12);
    EXPECT_NEAR(so3::wrap_angle(so3::yaw_of(c) - theta), 0.0, 1e-9);
  }
}

TEST(Yaw, DegenerateWhenBodyXVertical) {
  try {
    so3::yaw_of(so3::rot_y(-kPi / 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerate);
  }
}

TEST(Yaw, HeadingIncrementOnLevelAttitude) {
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const Mat3 c = so3::rot_z(rng.uniform(-kPi, kPi));
    const double delta = rng.uniform(-1.0, 1.0);
    const Mat3 next = so3::update_attitude(c, rodrigues_increment(Vec3(0, 0, delta), 1.0));
    EXPECT_NEAR(so3::wrap_angle(so3::yaw_of(next) - so3::yaw_of(c) - delta), 0.0, 1e-9);
  }
}

TEST(WrapAngle, Range) {
  EXPECT_DOUBLE_EQ(so3::wrap_angle(-kPi), kPi);
  EXPECT_DOUBLE_EQ(so3::wrap_angle(kPi), kPi);
  EXPECT_NEAR(so3::wrap_angle(3 * kPi / 2), -kPi / 2, 1e-15);
  EXPECT_NEAR(so3::wrap_angle(6.2), 6.2 - 2 * kPi, 1e-15);
}

}  // namespace
}  // namespace ionet
