#include <gtest/gtest.h>

#include <stdexcept>

#include "omav/spatial.hpp"
#include "oracles.hpp"

using namespace omav;

namespace {

std::mt19937_64 rng(7);

Twist rand_twist(double s = 1.0) { return oracle::random_vec(rng, -s, s); }

}  // namespace

TEST(Spatial, HatVeeRoundTrip) {
  for (int i = 0; i < 100; ++i) {
    const Twist V = rand_twist(3.0);
    EXPECT_LT((vee(hat(V)) - V).norm(), 1e-15);
  }
}

TEST(Spatial, VeeRejectsNonTwistMatrix) {
  Mat4 A = hat(rand_twist());
  A(3, 3) = 1e-3;
  EXPECT_THROW(vee(A), std::invalid_argument);
  Mat4 B = hat(rand_twist());
  B(0, 1) += 1e-3;
  EXPECT_THROW(vee(B), std::invalid_argument);
}

TEST(Spatial, SkewIsCrossProduct) {
  const Vec3 a(0.3, -1.2, 2.0), b(-0.7, 0.4, 1.1);
  EXPECT_LT((skew(a) * b - a.cross(b)).norm(), 1e-15);
}

TEST(Spatial, AdjointConjugatesHat) {
  for (int i = 0; i < 50; ++i) {
    const Pose C = oracle::random_pose(rng);
    const Twist V = rand_twist();
    const Mat4 lhs = C * hat(V) * pose_inverse(C);
    EXPECT_LT((lhs - hat(adjoint(C) * V)).norm(), 1e-12);
  }
}

TEST(Spatial, AdjointIsHomomorphism) {
  for (int i = 0; i < 50; ++i) {
    const Pose A = oracle::random_pose(rng), B = oracle::random_pose(rng);
    EXPECT_LT((adjoint(A * B) - adjoint(A) * adjoint(B)).norm(), 1e-12);
    EXPECT_LT((adjoint_inv(A) * adjoint(A) - Mat6::Identity()).norm(), 1e-12);
    EXPECT_LT((adjoint_inv(A) - adjoint(pose_inverse(A))).norm(), 1e-12);
  }
}

TEST(Spatial, AdIsLieBracket) {
  for (int i = 0; i < 50; ++i) {
    const Twist X = rand_twist(), Y = rand_twist();
    const Mat4 br = hat(X) * hat(Y) - hat(Y) * hat(X);
    EXPECT_LT((hat(ad(X) * Y) - br).norm(), 1e-13);
    EXPECT_LT((ad(X) * X).norm(), 1e-15);
  }
}

TEST(Spatial, AdIsDerivativeOfAdjoint) {
  const Twist V = rand_twist();
  const double h = 1e-6;
  const Mat6 d = (adjoint(exp_step(V, h)) - adjoint(exp_step(V, -h))) / (2 * h);
  EXPECT_LT((d - ad(V)).norm(), 1e-8);
}

TEST(Spatial, ExpMatchesMatrixExponential) {
  for (double s : {1e-10, 1e-7, 1e-3, 0.5, 2.0, 3.0}) {
    for (int i = 0; i < 20; ++i) {
      const Twist V = rand_twist(s);
      const double dt = 0.9;
      EXPECT_LT((exp_step(V, dt) - oracle::expm(V, dt)).norm(), 1e-12) << "scale " << s;
    }
  }
}

TEST(Spatial, ExpZeroIsIdentity) {
  EXPECT_EQ(exp_step(Twist::Zero(), 1.0), Pose::Identity());
}

TEST(Spatial, ExpOfPureRotationAndTranslation) {
  Twist V = Twist::Zero();
  V(2) = M_PI / 2;
  const Pose E = exp_step(V, 1.0);
  EXPECT_LT((E.topLeftCorner<3, 3>() - rot_z(M_PI / 2)).norm(), 1e-14);
  Twist T = Twist::Zero();
  T.tail<3>() = Vec3(1, 2, 3);
  EXPECT_LT((exp_step(T, 0.5) - translation(0.5, 1.0, 1.5)).norm(), 1e-15);
}

TEST(Spatial, ExpStaysOnGroup) {
  Pose C = Pose::Identity();
  for (int i = 0; i < 10000; ++i) C = exp_step(rand_twist(2.0), 1e-2) * C;
  EXPECT_TRUE(is_pose(C, 1e-10));
}

TEST(Spatial, ProjectionRecoversTwist) {
  for (int i = 0; i < 20; ++i) {
    const Twist V = rand_twist();
    EXPECT_LT((project_se3(hat(V)) - V).norm(), 1e-15);
  }
  // symmetric part of the rotation block is discarded
  Mat4 A = Mat4::Zero();
  A.topLeftCorner<3, 3>() = Mat3::Identity();
  EXPECT_LT(project_se3(A).norm(), 1e-15);
}

TEST(Spatial, LeftErrorVanishesAtSetpoint) {
  const Pose C = oracle::random_pose(rng);
  EXPECT_LT(left_error(C, C).norm(), 1e-14);
  const Pose Ce = oracle::random_pose(rng);
  EXPECT_LT((left_error(Ce, C) - (pose_inverse(Ce) * C - Mat4::Identity())).norm(), 1e-14);
}

TEST(Spatial, EulerXyzRoundTrip) {
  std::uniform_real_distribution<double> a(-M_PI + 1e-3, M_PI), b(-M_PI / 2 + 1e-3, M_PI / 2 - 1e-3);
  for (int i = 0; i < 200; ++i) {
    const Vec3 e(a(rng), b(rng), a(rng));
    EXPECT_LT((euler_xyz(from_euler_xyz(e)) - e).norm(), 1e-10);
  }
  const Mat3 R = rot_x(-60 * M_PI / 180) * rot_y(-30 * M_PI / 180) * rot_z(60 * M_PI / 180);
  EXPECT_LT((from_euler_xyz(Vec3(-60, -30, 60) * M_PI / 180) - R).norm(), 1e-15);
}

TEST(Spatial, WrapAngleRange) {
  EXPECT_DOUBLE_EQ(wrap_angle(M_PI), M_PI);
  EXPECT_DOUBLE_EQ(wrap_angle(-M_PI), M_PI);
  EXPECT_NEAR(wrap_angle(3 * M_PI / 2), -M_PI / 2, 1e-15);
  for (int i = 0; i < 1000; ++i) {
    const double q = std::uniform_real_distribution<double>(-50, 50)(rng);
    const double w = wrap_angle(q);
    EXPECT_GT(w, -M_PI);
    EXPECT_LE(w, M_PI);
    EXPECT_NEAR(std::remainder(q - w, 2 * M_PI), 0.0, 1e-12);
  }
}

TEST(Spatial, IsPose) {
  EXPECT_TRUE(is_pose(oracle::random_pose(rng)));
  Pose C = oracle::random_pose(rng);
  C(0, 0) += 1e-6;
  EXPECT_FALSE(is_pose(C));
  Pose D = Pose::Identity();
  D(3, 0) = 1.0;
  EXPECT_FALSE(is_pose(D));
}
