#include "omav/model.hpp"

#include <cmath>
#include <stdexcept>

#include "omav/errors.hpp"

namespace omav {

void RobotParams::validate() const {
  const double positive[] = {m_b, m_p, m_a, a, c, g, I_px, I_py, I_pz,
                             I_bx, I_by, I_bz, b_fx, b_fy};
  for (double v : positive) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError("robot parameters must be finite and positive");
    }
  }
  for (double v : k) {
    if (!std::isfinite(v)) throw ConfigError("drag ratios must be finite");
  }
}

Geometry make_geometry(const RobotParams& p) {
  const double h = 0.5 * p.a;
  Geometry geo;
  geo.r = {Vec3(h, -h, 0), Vec3(h, h, 0), Vec3(-h, h, 0), Vec3(-h, -h, 0)};
  geo.sigma = {1, -1, -1, 1};
  return geo;
}

ConstantScrews constant_screws(const RobotParams& p) {
  const Geometry geo = make_geometry(p);
  ConstantScrews cs;
  for (int i = 0; i < kPropellers; ++i) {
    const Vec3& r = geo.r[i];
    cs.y1[i] << Vec3::UnitX(), r.cross(Vec3::UnitX());
    cs.y2[i] << Vec3::UnitY(), r.cross(Vec3::UnitY());
    cs.home1[i] = make_pose(Mat3::Identity(), r);
  }
  return cs;
}

Kinematics forward_kinematics(const RobotParams& p, const Pose& C, const Vec6& q_t,
                              const Vec2& q5) {
  const Geometry geo = make_geometry(p);
  const Mat6 AdC = adjoint(C);
  Kinematics kin;
  kin.base = C;
  for (int i = 0; i < kPropellers; ++i) {
    const double q1 = i < kPassive ? q_t(2 * i) : q5(0);
    const double q2 = i < kPassive ? q_t(2 * i + 1) : q5(1);
    LinkFrames& L = kin.link[i];
    L.inter = C * make_pose(rot_x(q1), geo.r[i]);
    L.prop = L.inter * make_pose(rot_y(q2), Vec3::Zero());
    L.com = i < kPassive ? Pose(L.prop * translation(0, 0, -p.c)) : L.prop;
    Twist y1, ey;
    y1 << Vec3::UnitX(), geo.r[i].cross(Vec3::UnitX());
    ey << Vec3::UnitY(), Vec3::Zero();
    L.s1 = AdC * y1;
    L.s2 = adjoint(L.inter) * ey;
  }
  return kin;
}

std::array<ScrewBlock, 3> joint_screws(const RobotParams& p, const Pose& C, const Vec6& q_t) {
  const Kinematics kin = forward_kinematics(p, C, q_t, Vec2::Zero());
  std::array<ScrewBlock, 3> S;
  for (int j = 0; j < kPassive; ++j) {
    S[j].col(0) = kin.link[j].s1;
    S[j].col(1) = kin.link[j].s2;
  }
  return S;
}

Mat6 base_inertia(const RobotParams& p) {
  Vec6 d;
  d << p.I_bx, p.I_by, p.I_bz, p.m_b, p.m_b, p.m_b;
  return d.asDiagonal();
}

Mat6 passive_link_inertia(const RobotParams& p) {
  Vec6 d;
  d << p.I_px, p.I_py, p.I_pz, p.m_p, p.m_p, p.m_p;
  return d.asDiagonal();
}

Mat6 active_link_inertia(const RobotParams& p) {
  Vec6 d;
  d << 0, 0, 0, p.m_a, p.m_a, p.m_a;
  return d.asDiagonal();
}

Mat6 link_inertia(const RobotParams& p, int i) {
  return i < kPassive ? passive_link_inertia(p) : active_link_inertia(p);
}

Mat6 world_inertia(const Pose& C, const Mat6& I_com) {
  if ((I_com - I_com.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + I_com.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("world_inertia: inertia is not symmetric");
  }
  const Mat6 Ai = adjoint_inv(C);
  return Ai.transpose() * I_com * Ai;
}

Wrench unit_thrust_wrench(double k) {
  Wrench f;
  f << 0, 0, k, 0, 0, 1;
  return f;
}

ActuationMaps actuation_maps(const RobotParams& p, const Pose& C, const Vec6& q_t,
                             const Vec2& q5) {
  const Kinematics kin = forward_kinematics(p, C, q_t, q5);
  ActuationMaps m;
  m.Dt.setZero();
  for (int i = 0; i < kPropellers; ++i) {
    const Wrench W = adjoint_inv(kin.link[i].prop).transpose() * unit_thrust_wrench(p.k[i]);
    m.Db.col(i) = W;
    if (i < kPassive) {
      m.Dt(2 * i, i) = kin.link[i].s1.dot(W);
      m.Dt(2 * i + 1, i) = kin.link[i].s2.dot(W);
    }
  }
  return m;
}

Vec4 minimal_thrust(const RobotParams& p) {
  const double ksum = p.k[0] + p.k[1] + p.k[2] + p.k[3];
  if (std::abs(ksum) > 1e-12) {
    throw ConfigError("drag ratios must sum to zero for a drag-balanced hover");
  }
  const Geometry geo = make_geometry(p);
  Eigen::Matrix4d A;
  Vec4 b = Vec4::Zero();
  b(0) = p.total_mass() * p.g;
  for (int i = 0; i < kPropellers; ++i) {
    A(0, i) = 1.0;
    A(1, i) = geo.r[i].x();
    A(2, i) = geo.r[i].y();
    A(3, i) = p.k[i];
    b(1) += p.link_mass(i) * p.g * geo.r[i].x();
    b(2) += p.link_mass(i) * p.g * geo.r[i].y();
  }
  return A.partialPivLu().solve(b);
}

Vec6 spring_torque(const Vec6& q_t, const RobotParams& p) {
  Vec6 tau = Vec6::Zero();
  if (p.pjd != Pjd::Two) return tau;
  const Vec4 fbar = minimal_thrust(p);
  for (int j = 0; j < kPassive; ++j) {
    tau(2 * j) = -p.k[j] * fbar(j) * std::sin(q_t(2 * j + 1));
  }
  return tau;
}

Mat6 friction_matrix(const RobotParams& p) {
  Vec6 d;
  d << p.b_fx, p.b_fy, p.b_fx, p.b_fy, p.b_fx, p.b_fy;
  return d.asDiagonal();
}

Vec6 friction_torque(const Vec6& qd, const RobotParams& p) {
  return -(friction_matrix(p) * qd);
}

}  // namespace omav
