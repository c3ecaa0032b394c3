#include <gtest/gtest.h>

#include <chrono>

#include "omav/equilibrium.hpp"
#include "omav/errors.hpp"
#include "oracles.hpp"

using namespace omav;

namespace {

std::mt19937_64 rng(31);
constexpr double kDeg = M_PI / 180.0;

Vec6 input(const Vec4& f) {
  Vec6 u = Vec6::Zero();
  u.head<4>() = f;
  return u;
}

Pose pose_deg(double r, double p, double y) {
  return make_pose(from_euler_xyz(Vec3(r, p, y) * kDeg), Vec3::Zero());
}

}  // namespace

TEST(Equilibrium, JointAnglesAtSimpleAttitudes) {
  EXPECT_LT(pjd2_joint_equilibrium(Mat3::Identity()).norm(), 1e-15);
  EXPECT_LT((pjd2_joint_equilibrium(rot_y(60 * kDeg)) - Vec2(0, -60 * kDeg)).norm(), 1e-14);
  EXPECT_LT((pjd2_joint_equilibrium(rot_x(60 * kDeg)) - Vec2(-60 * kDeg, 0)).norm(), 1e-14);
}

TEST(Equilibrium, JointAnglesKeepPropellersVertical) {
  for (int n = 0; n < 1000; ++n) {
    const Mat3 R = oracle::random_pose(rng).topLeftCorner<3, 3>();
    const Vec2 q = pjd2_joint_equilibrium(R);
    const Vec3 lhs = rot_x(q(0)) * rot_y(q(1)) * Vec3::UnitZ();
    EXPECT_LT((lhs - R.transpose() * Vec3::UnitZ()).norm(), 1e-9);
  }
}

TEST(Equilibrium, GimbalAttitude) {
  // base x-axis pointing straight up
  const Mat3 R = rot_y(-M_PI / 2);
  ASSERT_NEAR(R(2, 0), 1.0, 1e-15);
  const Vec2 q = pjd2_joint_equilibrium(R);
  EXPECT_EQ(q(0), 0.0);
  EXPECT_LT((rot_y(q(1)) * Vec3::UnitZ() - R.transpose() * Vec3::UnitZ()).norm(), 1e-9);
}

TEST(Equilibrium, Pjd2Thrust) {
  const RobotParams p;
  const Vec4 f = pjd2_thrust(p);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(f(i), 9.81 * (0.25 + 0.5), 1e-12);
  EXPECT_NEAR(f.sum(), 29.43, 1e-12);
  RobotParams heavy;
  heavy.m_p *= 2;
  heavy.m_a *= 2;  // the active link weighs the same as a passive one
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(pjd2_thrust(heavy)(i), 9.81 * (0.25 + 1.0), 1e-12);
  RobotParams bad;
  bad.k = {0.01, 0.01, -0.01, 0.02};
  EXPECT_THROW(pjd2_thrust(bad), ConfigError);
}

TEST(Equilibrium, ResidualDrag) {
  const RobotParams p;
  const Vec4 f = Vec4::Constant(7.3575);
  EXPECT_EQ(residual_drag(Vec6::Zero(), f, p), Vec3::Zero());
  Vec6 q = Vec6::Zero();
  q(1) = -60 * kDeg;
  EXPECT_NEAR(residual_drag(q, f, p)(0), -0.0637, 5e-5);
  RobotParams flipped = p;
  flipped.k[0] = -p.k[0];
  EXPECT_DOUBLE_EQ(residual_drag(q, f, flipped)(0), -residual_drag(q, f, p)(0));
}

TEST(Equilibrium, Pjd2SweepIsMinimalAndVertical) {
  const RobotParams p;
  std::vector<Pose> poses;
  for (int n = 0; n < 100; ++n) poses.push_back(oracle::random_pose(rng));
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<EquilibriumSolution> sols;
  for (const Pose& C : poses) sols.push_back(pjd2_equilibrium(C, p));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(secs, 1.0);
  for (std::size_t n = 0; n < poses.size(); ++n) {
    const EquilibriumSolution& e = sols[n];
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(e.f(i), 7.3575, 1e-9);
    EXPECT_NEAR(e.f.sum(), 29.43, 1e-9);
    EXPECT_LT(e.residual_norm, 1e-9);
    EXPECT_TRUE(verify_vertical(p, poses[n], e.q, e.q5));
    for (int j = 1; j < 3; ++j) EXPECT_EQ(e.q.segment<2>(2 * j), e.q.head<2>());
    EXPECT_EQ(e.q5, e.q.head<2>());
    EXPECT_EQ(internal_force(e.f, p).cls, ForceClass::Minimal);
    SystemState x;
    x.C = poses[n];
    x.q = e.q;
    x.q5 = e.q5;
    const Accel a = forward_dynamics_dense(x, input(e.f), p);
    EXPECT_LT(a.Vd.norm() + a.qdd.norm(), 1e-9);
  }
}

TEST(Equilibrium, VerticalConfigurationNeedsWeightOnly) {
  // solve static balance for the thrusts only, with the links forced vertical
  const RobotParams p;
  for (int n = 0; n < 20; ++n) {
    const Pose C = oracle::random_pose(rng);
    const Vec2 qe = pjd2_joint_equilibrium(C.topLeftCorner<3, 3>());
    Vec6 q;
    q << qe, qe, qe;
    Eigen::Matrix<double, 12, 4> A;
    const Vec12 r0 = static_residual(C, q, qe, Vec4::Zero(), p);
    for (int i = 0; i < 4; ++i) A.col(i) = static_residual(C, q, qe, Vec4::Unit(i), p) - r0;
    const Vec4 f = A.colPivHouseholderQr().solve(Vec12(-r0));
    EXPECT_LT((A * f + r0).norm(), 1e-9);
    EXPECT_NEAR(f.sum(), p.total_mass() * p.g, 1e-9);
  }
}

TEST(Equilibrium, Pjd1MatchesPjd2AtLevelAttitude) {
  RobotParams p;
  p.pjd = Pjd::One;
  const EquilibriumSolution e1 = pjd1_equilibrium(translation(1, 2, 3), p);
  const EquilibriumSolution e2 = pjd2_equilibrium(translation(1, 2, 3), p);
  EXPECT_LT((e1.q - e2.q).norm(), 1e-9);
  EXPECT_LT((e1.f - e2.f).norm(), 1e-9);
  EXPECT_LT(e1.residual_norm, 1e-9);
}

TEST(Equilibrium, Pjd1CarriesInternalForce) {
  RobotParams p;
  p.pjd = Pjd::One;
  const Pose C = pose_deg(0, 60, 0);
  const EquilibriumSolution e = pjd1_equilibrium(C, p);
  EXPECT_LT(e.residual_norm, 1e-9);
  EXPECT_LT(static_residual(C, e.q, e.q5, e.f, p).norm(), 1e-9);
  const double ratio = e.f.sum() / (p.total_mass() * p.g);
  EXPECT_GE(ratio, 1.005);
  EXPECT_LE(ratio, 1.04);
  const InternalForce inf = internal_force(e.f, p);
  EXPECT_EQ(inf.cls, ForceClass::Internal);
  EXPECT_GT(inf.excess, 0.0);
  EXPECT_FALSE(verify_vertical(p, C, e.q, e.q5));
  SystemState x;
  x.C = C;
  x.q = e.q;
  x.q5 = e.q5;
  const Accel a = forward_dynamics_dense(x, input(e.f), p);
  EXPECT_LT(a.Vd.norm() + a.qdd.norm(), 1e-9);
}

TEST(Equilibrium, Pjd1ApproachesPjd2AsDragShrinks) {
  const Pose C = pose_deg(0, 60, 0);
  RobotParams p;
  p.pjd = Pjd::One;
  const EquilibriumSolution e2 = pjd2_equilibrium(C, p);
  double prev_gap = INFINITY, prev_ratio = INFINITY;
  for (double s : {1.0, 0.5, 0.25, 0.125, 0.1, 0.01}) {
    RobotParams q = p;
    for (double& k : q.k) k *= s;
    const EquilibriumSolution e1 = pjd1_equilibrium(C, q);
    const double gap = (e1.q - e2.q).norm();
    const double ratio = e1.f.sum() / (q.total_mass() * q.g);
    EXPECT_LT(gap, prev_gap);
    EXPECT_LT(ratio, prev_ratio);
    EXPECT_GT(ratio, 1.0);
    prev_gap = gap;
    prev_ratio = ratio;
  }
  EXPECT_LT(prev_ratio - 1.0, 1e-5);
}

TEST(Equilibrium, Pjd1ReportsFoldedBranch) {
  RobotParams p;
  p.pjd = Pjd::One;
  try {
    pjd1_equilibrium(pose_deg(-72.6051, -39.7102, -70.3344), p);
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence& e) {
    EXPECT_GT(e.residual, 1e-9);
  } catch (const SingularityError&) {
  }
}

TEST(Equilibrium, SolveDispatchesOnDesign) {
  RobotParams p;
  const Pose C = pose_deg(0, 60, 0);
  EXPECT_EQ(solve_equilibrium(C, p).pjd, Pjd::Two);
  p.pjd = Pjd::One;
  EXPECT_EQ(solve_equilibrium(C, p).pjd, Pjd::One);
}

TEST(Equilibrium, InternalForceClasses) {
  const RobotParams p;
  const InternalForce m = internal_force(pjd2_thrust(p), p);
  EXPECT_EQ(m.cls, ForceClass::Minimal);
  EXPECT_NEAR(m.excess, 0.0, 1e-12);
  const InternalForce z = internal_force(Vec4::Zero(), p);
  EXPECT_EQ(z.cls, ForceClass::Deficit);
  EXPECT_NEAR(z.excess, -29.43, 1e-12);
  EXPECT_EQ(internal_force(Vec4::Constant(8.0), p).cls, ForceClass::Internal);
  EXPECT_THROW(internal_force(Vec4(1, -1e-3, 1, 1), p), InvalidThrust);
}

TEST(Equilibrium, VerifyVerticalHome) {
  const RobotParams p;
  EXPECT_TRUE(verify_vertical(p, Pose::Identity(), Vec6::Zero(), Vec2::Zero()));
  Vec6 q = Vec6::Zero();
  q(3) = 1e-6;
  EXPECT_FALSE(verify_vertical(p, Pose::Identity(), q, Vec2::Zero()));
}
