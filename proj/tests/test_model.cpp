#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "omav/equilibrium.hpp"
#include "omav/errors.hpp"
#include "omav/model.hpp"
#include "oracles.hpp"

using namespace omav;

namespace {

std::mt19937_64 rng(11);

}  // namespace

TEST(Model, TotalMass) {
  const RobotParams p;
  EXPECT_DOUBLE_EQ(p.total_mass(), 3.0);
}

TEST(Model, ValidateRejectsNonPositive) {
  RobotParams p;
  EXPECT_NO_THROW(p.validate());
  p.m_p = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
  RobotParams q;
  q.I_bz = -1.0;
  EXPECT_THROW(q.validate(), ConfigError);
  RobotParams r;
  r.k[2] = NAN;
  EXPECT_THROW(r.validate(), ConfigError);
}

TEST(Model, ConstantScrewsFromJointCenters) {
  const RobotParams p;
  const ConstantScrews cs = constant_screws(p);
  Twist y21, y31;
  y21 << 1, 0, 0, 0, 0, p.a / 2;
  y31 << 1, 0, 0, 0, 0, -p.a / 2;
  EXPECT_LT((cs.y1[0] - y21).norm(), 1e-15);
  EXPECT_LT((cs.y1[1] - y31).norm(), 1e-15);
  const Geometry geo = make_geometry(p);
  for (int i = 0; i < 4; ++i) {
    EXPECT_LT((cs.y1[i].tail<3>() - geo.r[i].cross(Vec3::UnitX())).norm(), 1e-15);
    // r_y = -sigma a / 2, so the z moment is sigma a / 2
    EXPECT_DOUBLE_EQ(cs.y1[i](5), geo.sigma[i] * p.a / 2);
  }
}

TEST(Model, JointCentersFormSquare) {
  const RobotParams p;
  const Geometry geo = make_geometry(p);
  for (int i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(geo.r[i].z(), 0.0);
    EXPECT_NEAR((geo.r[i] - geo.r[(i + 1) % 4]).norm(), p.a, 1e-15);
  }
  EXPECT_LT((geo.r[0] + geo.r[1] + geo.r[2] + geo.r[3]).norm(), 1e-15);
}

TEST(Model, ScrewsAtHomeAndUnitAxes) {
  const RobotParams p;
  const ConstantScrews cs = constant_screws(p);
  const auto S = joint_screws(p, Pose::Identity(), Vec6::Zero());
  for (int j = 0; j < 3; ++j) {
    EXPECT_LT((S[j].col(0) - cs.y1[j]).norm(), 1e-15);
    EXPECT_LT((S[j].col(1) - cs.y2[j]).norm(), 1e-15);
  }
  for (int n = 0; n < 100; ++n) {
    const auto Sr = joint_screws(p, oracle::random_pose(rng), oracle::random_vec(rng, -3, 3));
    for (int j = 0; j < 3; ++j) {
      for (int c = 0; c < 2; ++c) {
        EXPECT_NEAR(Sr[j].col(c).head<3>().norm(), 1.0, 1e-12);
        // a revolute screw has zero pitch
        EXPECT_NEAR(Sr[j].col(c).head<3>().dot(Sr[j].col(c).tail<3>()), 0.0, 1e-12);
      }
    }
  }
}

TEST(Model, ScrewRatesMatchFiniteDifference) {
  const RobotParams p;
  for (int n = 0; n < 20; ++n) {
    const SystemState x = oracle::random_state(rng);
    const oracle::Trajectory s{x, oracle::random_thrust(rng)};
    const StateTerms t = compute_terms(x, p);
    for (int j = 0; j < 3; ++j) {
      const ScrewBlock fd = oracle::central(s, Vec6::Zero(), p, 1e-5, [&](const oracle::Trajectory& y) {
        return ScrewBlock(joint_screws(p, y.x.C, y.x.q)[j]);
      });
      EXPECT_LT(oracle::rel_err(t.Sd[j], fd), 1e-5);
    }
  }
}

TEST(Model, ForwardKinematicsHome) {
  const RobotParams p;
  const Kinematics kin = forward_kinematics(p, Pose::Identity(), Vec6::Zero(), Vec2::Zero());
  EXPECT_LT((kin.link[0].com.topRightCorner<3, 1>() - Vec3(p.a / 2, -p.a / 2, -p.c)).norm(), 1e-15);
  for (int i = 0; i < 4; ++i) {
    EXPECT_LT((kin.link[i].prop.topLeftCorner<3, 3>() - Mat3::Identity()).norm(), 1e-15);
  }
}

TEST(Model, ComOffsetAlongPropellerAxis) {
  const RobotParams p;
  for (int n = 0; n < 50; ++n) {
    const Kinematics kin = forward_kinematics(p, oracle::random_pose(rng),
                                              oracle::random_vec(rng, -3, 3),
                                              oracle::random_vec(rng, -3, 3).head<2>());
    for (int j = 0; j < 3; ++j) {
      const Vec3 d = kin.link[j].prop.topRightCorner<3, 1>() - kin.link[j].com.topRightCorner<3, 1>();
      EXPECT_LT((d - kin.link[j].prop.topLeftCorner<3, 3>() * Vec3(0, 0, p.c)).norm(), 1e-14);
    }
    EXPECT_EQ(kin.link[3].com, kin.link[3].prop);
  }
}

TEST(Model, ForwardKinematicsChainOracle) {
  const RobotParams p;
  const Pose C = oracle::random_pose(rng);
  const Vec6 q = oracle::random_vec(rng, -2, 2);
  const Kinematics kin = forward_kinematics(p, C, q, Vec2::Zero());
  const ConstantScrews cs = constant_screws(p);
  for (int j = 0; j < 3; ++j) {
    // product of exponentials with base-frame screws
    const Pose home = cs.home1[j] * translation(0, 0, -p.c);
    const Pose ref = C * oracle::expm(cs.y1[j], q(2 * j)) * oracle::expm(cs.y2[j], q(2 * j + 1)) * home;
    EXPECT_LT((kin.link[j].com - ref).norm(), 1e-12);
  }
}

TEST(Model, WorldInertia) {
  const RobotParams p;
  const Mat6 I = passive_link_inertia(p);
  EXPECT_LT((world_inertia(Pose::Identity(), I) - I).norm(), 1e-15);
  Mat6 bad = I;
  bad(0, 1) = 1e-3;
  EXPECT_THROW(world_inertia(Pose::Identity(), bad), std::invalid_argument);

  Eigen::SelfAdjointEigenSolver<Mat6> ref(I);
  for (int n = 0; n < 50; ++n) {
    const Pose C = oracle::random_pose(rng);
    const Mat6 M = world_inertia(C, I);
    EXPECT_LT((M.bottomRightCorner<3, 3>() - p.m_p * Mat3::Identity()).norm(), 1e-14);
    EXPECT_LT((M - M.transpose()).norm(), 1e-14);
    // pure rotation about the CoM keeps the spectrum
    const Pose Rc = make_pose(C.topLeftCorner<3, 3>(), Vec3::Zero());
    Eigen::SelfAdjointEigenSolver<Mat6> es(world_inertia(Rc, I));
    EXPECT_LT((es.eigenvalues() - ref.eigenvalues()).norm(), 1e-12);
  }
  EXPECT_EQ((active_link_inertia(p).topLeftCorner<3, 3>().norm()), 0.0);
}

TEST(Model, ActuationMapsAtHome) {
  const RobotParams p;
  const ActuationMaps m = actuation_maps(p, Pose::Identity(), Vec6::Zero(), Vec2::Zero());
  const Geometry geo = make_geometry(p);
  for (int i = 0; i < 4; ++i) {
    EXPECT_LT((m.Db.col(i).tail<3>() - Vec3::UnitZ()).norm(), 1e-15);
    // moment of a vertical thrust at r plus the drag torque
    const Vec3 tau = geo.r[i].cross(Vec3::UnitZ()) + p.k[i] * Vec3::UnitZ();
    EXPECT_LT((m.Db.col(i).head<3>() - tau).norm(), 1e-15);
  }
  for (int j = 0; j < 3; ++j) {
    // x-axis through r_j: thrust along z at r_j has zero moment, drag has none on x
    EXPECT_NEAR(m.Dt(2 * j, j), 0.0, 1e-15);
    EXPECT_NEAR(m.Dt(2 * j + 1, j), 0.0, 1e-15);
  }
}

TEST(Model, ActuationMapTiltedJointRow) {
  const RobotParams p;
  Vec6 q = Vec6::Zero();
  q(1) = 0.4;
  const ActuationMaps m = actuation_maps(p, Pose::Identity(), q, Vec2::Zero());
  // drag torque k (R e_z) projected on the first axis
  EXPECT_NEAR(m.Dt(0, 0), p.k[0] * std::sin(0.4), 1e-15);
  EXPECT_NEAR(m.Dt(1, 0), 0.0, 1e-15);
}

TEST(Model, MinimalThrust) {
  const RobotParams p;
  const Vec4 f = minimal_thrust(p);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(f(i), 7.3575, 1e-12);
  EXPECT_NEAR(f.sum(), 29.43, 1e-12);
  RobotParams q;
  q.k = {0.01, 0.01, 0.01, -0.01};
  EXPECT_THROW(minimal_thrust(q), ConfigError);
}

TEST(Model, MinimalThrustWithHeavierLinks) {
  RobotParams p;
  p.m_p = 1.0;
  p.m_a = 1.0;
  const Vec4 f = minimal_thrust(p);
  EXPECT_NEAR(f.sum(), p.total_mass() * p.g, 1e-12);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(f(i), p.total_mass() * p.g / 4, 1e-12);
  RobotParams q;
  q.m_a = 1.0;
  const Vec4 g = minimal_thrust(q);
  EXPECT_NEAR(g.sum(), q.total_mass() * q.g, 1e-12);
  // moments about the base center balance
  const Geometry geo = make_geometry(q);
  Vec3 m = Vec3::Zero();
  for (int i = 0; i < 4; ++i) m += geo.r[i].cross(Vec3(0, 0, g(i) - q.link_mass(i) * q.g));
  EXPECT_LT(m.norm(), 1e-12);
}

TEST(Model, ForceBalanceAtEquilibrium) {
  const RobotParams p;
  for (int n = 0; n < 20; ++n) {
    const Pose C = oracle::random_pose(rng);
    const EquilibriumSolution e = pjd2_equilibrium(C, p);
    const ActuationMaps m = actuation_maps(p, C, e.q, e.q5);
    const Vec6 W = m.Db * e.f;
    EXPECT_LT(W.tail<3>().head<2>().norm(), 1e-12);
    EXPECT_NEAR(W(5), p.total_mass() * p.g, 1e-12);
  }
}

TEST(Model, SpringTorque) {
  const RobotParams p;
  EXPECT_EQ(spring_torque(Vec6::Zero(), p), Vec6::Zero());
  Vec6 q = Vec6::Zero();
  q(1) = M_PI / 2;
  EXPECT_NEAR(std::abs(spring_torque(q, p)(0)), 0.073575, 1e-15);
  RobotParams p1 = p;
  p1.pjd = Pjd::One;
  EXPECT_EQ(spring_torque(q, p1), Vec6::Zero());
  for (int n = 0; n < 20; ++n) {
    const Pose C = oracle::random_pose(rng);
    const EquilibriumSolution e = pjd2_equilibrium(C, p);
    const Vec6 ts = spring_torque(e.q, p);
    const Vec3 td = residual_drag(e.q, e.f, p);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(ts(2 * j) + td(j), 0.0, 1e-12);
  }
}

TEST(Model, FrictionIsDissipative) {
  const RobotParams p;
  EXPECT_EQ(friction_torque(Vec6::Zero(), p), Vec6::Zero());
  const Vec6 tau = friction_torque(Vec6::Unit(0), p);
  EXPECT_DOUBLE_EQ(tau(0), -0.9);
  EXPECT_EQ(tau.tail<5>(), Vec6::Zero().tail<5>());
  for (int n = 0; n < 1000; ++n) {
    const Vec6 qd = oracle::random_vec(rng, -5, 5);
    EXPECT_LE(qd.dot(friction_torque(qd, p)), 0.0);
  }
}
