#include "omav/dynamics.hpp"

#include <cmath>

#include "omav/errors.hpp"

namespace omav {

namespace {

Mat6 inertia_rate(const Mat6& M, const Twist& V) {
  const Mat6 a = ad(V);
  return -M * a - a.transpose() * M;
}

// Block-diagonal inverse of the 6x6 passive mass matrix.
Mat6 block_inverse(const Mat6& Mtt) {
  Mat6 inv = Mat6::Zero();
  for (int j = 0; j < kPassive; ++j) {
    inv.block<2, 2>(2 * j, 2 * j) = Mtt.block<2, 2>(2 * j, 2 * j).inverse();
  }
  return inv;
}

Vec6 spring_rate(const SystemState& x, const RobotParams& p) {
  Vec6 d = Vec6::Zero();
  if (p.pjd != Pjd::Two) return d;
  const Vec4 fbar = minimal_thrust(p);
  for (int j = 0; j < kPassive; ++j) {
    d(2 * j) = -p.k[j] * fbar(j) * std::cos(x.q(2 * j + 1)) * x.qd(2 * j + 1);
  }
  return d;
}

}  // namespace

Twist gravity_twist(const RobotParams& p) {
  Twist G = Twist::Zero();
  G(5) = -p.g;
  return G;
}

StateTerms compute_terms(const SystemState& x, const RobotParams& p) {
  StateTerms t;
  t.kin = forward_kinematics(p, x.C, x.q, x.q5);
  t.M[0] = world_inertia(x.C, base_inertia(p));
  for (int i = 0; i < kPropellers; ++i) {
    t.M[i + 1] = world_inertia(t.kin.link[i].com, link_inertia(p, i));
    t.Wunit[i] = adjoint_inv(t.kin.link[i].prop).transpose() * unit_thrust_wrench(p.k[i]);
  }
  const Mat6 adV = ad(x.V);
  t.Vb[0] = x.V;
  t.Vb[4] = x.V;  // link 5 is a point mass at its center of rotation
  for (int j = 0; j < kPassive; ++j) {
    const LinkFrames& L = t.kin.link[j];
    t.S[j].col(0) = L.s1;
    t.S[j].col(1) = L.s2;
    t.Vj1[j] = x.V + L.s1 * x.qd(2 * j);
    t.Sd[j].col(0) = adV * L.s1;
    t.Sd[j].col(1) = ad(t.Vj1[j]) * L.s2;
    t.Vb[j + 1] = t.Vj1[j] + L.s2 * x.qd(2 * j + 1);
  }
  for (int b = 0; b < 5; ++b) t.Md[b] = inertia_rate(t.M[b], t.Vb[b]);
  return t;
}

GeneralizedMatrices assemble(const SystemState& x, const RobotParams& p) {
  return assemble(compute_terms(x, p), x, p);
}

GeneralizedMatrices assemble(const StateTerms& t, const SystemState& x, const RobotParams& p) {
  const Twist G = gravity_twist(p);
  GeneralizedMatrices gm;
  gm.M.setZero();
  gm.h.setZero();
  gm.g.setZero();
  gm.tau.setZero();

  Mat6 Mbb = Mat6::Zero();
  Vec6 hb = Vec6::Zero();
  Vec6 gb = Vec6::Zero();
  for (int b = 0; b < 5; ++b) {
    Mbb += t.M[b];
    hb += t.Md[b] * t.Vb[b];
    gb -= t.M[b] * G;
  }
  for (int j = 0; j < kPassive; ++j) {
    const Mat6& M = t.M[j + 1];
    const ScrewBlock& S = t.S[j];
    const Vec2 qd = x.qd.segment<2>(2 * j);
    const ScrewBlock MS = M * S;
    gm.M.block<6, 2>(0, 6 + 2 * j) = MS;
    gm.M.block<2, 6>(6 + 2 * j, 0) = MS.transpose();
    gm.M.block<2, 2>(6 + 2 * j, 6 + 2 * j) = S.transpose() * MS;
    const Vec6 a = t.Sd[j] * qd;
    hb += M * a;
    gm.h.segment<2>(6 + 2 * j) = S.transpose() * (t.Md[j + 1] * t.Vb[j + 1] + M * a);
    gm.g.segment<2>(6 + 2 * j) = -S.transpose() * (M * G);
  }
  gm.M.topLeftCorner<6, 6>() = Mbb;
  gm.h.head<6>() = hb;
  gm.g.head<6>() = gb;
  gm.tau.tail<6>() = friction_torque(x.qd, p) + spring_torque(x.q, p);
  return gm;
}

Vec12 applied_wrench(const StateTerms& t, const Vec4& f) {
  Vec12 W = Vec12::Zero();
  for (int i = 0; i < kPropellers; ++i) W.head<6>() += t.Wunit[i] * f(i);
  for (int j = 0; j < kPassive; ++j) {
    W.segment<2>(6 + 2 * j) = t.S[j].transpose() * t.Wunit[j] * f(j);
  }
  return W;
}

Accel forward_dynamics_dense(const SystemState& x, const Vec6& u, const RobotParams& p) {
  const StateTerms t = compute_terms(x, p);
  const GeneralizedMatrices gm = assemble(t, x, p);
  const Vec12 rhs = -gm.h - gm.g + gm.tau + applied_wrench(t, u.head<4>());
  const Eigen::LDLT<Mat12> ldlt(gm.M);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 0.0) {
    throw ModelError("generalized mass matrix is not positive definite");
  }
  const Vec12 xd2 = ldlt.solve(rhs);
  Accel acc;
  acc.Vd = xd2.head<6>();
  acc.qdd = xd2.tail<6>();
  return acc;
}

Accel forward_dynamics_aba(const SystemState& x, const Vec6& u, const RobotParams& p) {
  return forward_dynamics_aba(compute_terms(x, p), x, u.head<4>(), p);
}

Accel forward_dynamics_aba(const StateTerms& t, const SystemState& x, const Vec4& f,
                           const RobotParams& p) {
  const Twist G = gravity_twist(p);
  const Vec6 tau = friction_torque(x.qd, p) + spring_torque(x.q, p);

  const Mat6 Mr = t.M[0] + t.M[4];
  Mat6 MA = Mr;
  Wrench WA = -ad(x.V).transpose() * (Mr * x.V) - t.Wunit[3] * f(3) - Mr * G;

  std::array<Mat6, 3> MA1;
  std::array<double, 3> psi1, psi2, qt1, qt2;
  for (int j = 0; j < kPassive; ++j) {
    const Mat6& M = t.M[j + 1];
    const Twist& Vj = t.Vb[j + 1];
    const Twist s1 = t.S[j].col(0), s2 = t.S[j].col(1);
    const Twist sd1 = t.Sd[j].col(0), sd2 = t.Sd[j].col(1);
    const double qd1 = x.qd(2 * j), qd2 = x.qd(2 * j + 1);

    const Wrench WA2 = -ad(Vj).transpose() * (M * Vj) - t.Wunit[j] * f(j) - M * G;
    const Vec6 Ms2 = M * s2;
    const double d2 = s2.dot(Ms2);
    if (!(d2 > 0.0)) throw ModelError("articulated inertia is singular");
    psi2[j] = 1.0 / d2;
    qt2[j] = psi2[j] * (tau(2 * j + 1) - s2.dot(M * sd2 * qd2 + WA2));
    MA1[j] = M - Ms2 * psi2[j] * Ms2.transpose();
    const Wrench WAj1 = M * (s2 * qt2[j] + sd2 * qd2) + WA2;

    const Vec6 Ms1 = MA1[j] * s1;
    const double d1 = s1.dot(Ms1);
    if (!(d1 > 0.0)) throw ModelError("articulated inertia is singular");
    psi1[j] = 1.0 / d1;
    qt1[j] = psi1[j] * (tau(2 * j) - s1.dot(MA1[j] * sd1 * qd1 + WAj1));
    MA += MA1[j] - Ms1 * psi1[j] * Ms1.transpose();
    WA += MA1[j] * (s1 * qt1[j] + sd1 * qd1) + WAj1;
  }

  const Eigen::LDLT<Mat6> ldlt(MA);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw ModelError("articulated base inertia is not positive definite");
  }
  Accel acc;
  acc.Vd = ldlt.solve(-WA);
  for (int j = 0; j < kPassive; ++j) {
    const Twist s1 = t.S[j].col(0), s2 = t.S[j].col(1);
    const Twist sd1 = t.Sd[j].col(0);
    const double q1 = qt1[j] - psi1[j] * s1.dot(MA1[j] * acc.Vd);
    const Twist Vd1 = acc.Vd + s1 * q1 + sd1 * x.qd(2 * j);
    acc.qdd(2 * j) = q1;
    acc.qdd(2 * j + 1) = qt2[j] - psi2[j] * s2.dot(t.M[j + 1] * Vd1);
  }
  return acc;
}

ReducedBaseTerms reduced_base_terms(const SystemState& x, const RobotParams& p) {
  const StateTerms t = compute_terms(x, p);
  return reduced_base_terms(t, assemble(t, x, p));
}

ReducedBaseTerms reduced_base_terms(const StateTerms& t, const GeneralizedMatrices& gm) {
  const Mat6 Mbb = gm.M.topLeftCorner<6, 6>();
  const Mat6 Mbt = gm.M.topRightCorner<6, 6>();
  const Mat6 Mtt_inv = block_inverse(gm.M.bottomRightCorner<6, 6>());
  const Mat6 K = Mbt * Mtt_inv;

  ReducedBaseTerms r;
  r.Mb = Mbb - K * Mbt.transpose();
  r.Mb = 0.5 * (r.Mb + r.Mb.transpose());
  const Vec6 rhs = -gm.h.head<6>() - gm.g.head<6>() -
                   K * (gm.tau.tail<6>() - gm.h.tail<6>() - gm.g.tail<6>());
  r.F1 = r.Mb.ldlt().solve(rhs);
  r.D1.setZero();
  for (int j = 0; j < kPassive; ++j) {
    const ScrewBlock MS = t.M[j + 1] * t.S[j];
    const Eigen::Matrix2d Mj = t.S[j].transpose() * MS;
    r.B[j] = Mat6::Identity() - MS * Mj.inverse() * t.S[j].transpose();
    r.D1.col(j) = r.B[j] * t.Wunit[j];
  }
  r.D1.col(3) = t.Wunit[3];
  return r;
}

DerivativeCascade derivative_cascade(const SystemState& x, const Vec6& u, const Accel& acc,
                                     const RobotParams& p, const Vec6& w) {
  return derivative_cascade(compute_terms(x, p), x, u.head<4>(), acc, p, w);
}

DerivativeCascade derivative_cascade(const StateTerms& t, const SystemState& x, const Vec4& f,
                                     const Accel& acc, const RobotParams& p, const Vec6& w) {
  const Twist G = gravity_twist(p);
  const Twist& V = x.V;
  const Twist& Vd = acc.Vd;
  const Mat6 adV = ad(V);
  const Mat6 adVd = ad(Vd);

  DerivativeCascade dc;
  dc.Md = t.Md;
  dc.Sd = t.Sd;

  std::array<Twist, 5> Vbd;
  Vbd[0] = Vd;
  Vbd[4] = Vd;
  for (int j = 0; j < kPassive; ++j) {
    const Twist s1 = t.S[j].col(0), s2 = t.S[j].col(1);
    const Twist sd1 = t.Sd[j].col(0), sd2 = t.Sd[j].col(1);
    const Twist Vj1d = Vd + sd1 * x.qd(2 * j) + s1 * acc.qdd(2 * j);
    dc.Sdd[j].col(0) = adVd * s1 + adV * sd1;
    dc.Sdd[j].col(1) = ad(Vj1d) * s2 + ad(t.Vj1[j]) * sd2;
    Vbd[j + 1] = Vj1d + sd2 * x.qd(2 * j + 1) + s2 * acc.qdd(2 * j + 1);
  }

  dc.Mbb_d.setZero();
  dc.hb_d.setZero();
  dc.gb_d.setZero();
  for (int b = 0; b < 5; ++b) {
    const Mat6 a = ad(t.Vb[b]);
    const Mat6 ad_ = ad(Vbd[b]);
    dc.Mdd[b] = -t.Md[b] * a - t.M[b] * ad_ - ad_.transpose() * t.M[b] - a.transpose() * t.Md[b];
    dc.Mbb_d += t.Md[b];
    dc.hb_d += dc.Mdd[b] * t.Vb[b] + t.Md[b] * Vbd[b];
    dc.gb_d -= t.Md[b] * G;
  }

  dc.Mbt_d.setZero();
  dc.Mtt_d.setZero();
  for (int j = 0; j < kPassive; ++j) {
    const Mat6& M = t.M[j + 1];
    const Mat6& Md = t.Md[j + 1];
    const Mat6& Mdd = dc.Mdd[j + 1];
    const ScrewBlock& S = t.S[j];
    const ScrewBlock& Sd = t.Sd[j];
    const Vec2 qd = x.qd.segment<2>(2 * j);
    const Vec2 qdd = acc.qdd.segment<2>(2 * j);
    const Vec6 a = Sd * qd;
    const Vec6 a_d = dc.Sdd[j] * qd + Sd * qdd;

    dc.Mbt_d.block<6, 2>(0, 2 * j) = Md * S + M * Sd;
    dc.Mtt_d.block<2, 2>(2 * j, 2 * j) =
        Sd.transpose() * M * S + S.transpose() * Md * S + S.transpose() * M * Sd;
    dc.hb_d += Md * a + M * a_d;
    dc.ht_d.segment<2>(2 * j) =
        Sd.transpose() * (Md * t.Vb[j + 1] + M * a) +
        S.transpose() * (Mdd * t.Vb[j + 1] + Md * Vbd[j + 1] + Md * a + M * a_d);
    dc.gt_d.segment<2>(2 * j) = -Sd.transpose() * (M * G) - S.transpose() * (Md * G);
  }

  for (int i = 0; i < kPropellers; ++i) {
    Twist Vp;
    if (i < kPassive) {
      Vp = t.Vb[i + 1];
    } else {
      Vp = V + t.kin.link[3].s1 * w(4) + t.kin.link[3].s2 * w(5);
    }
    dc.W_d[i] = -ad(Vp).transpose() * t.Wunit[i] * f(i) + t.Wunit[i] * w(i);
  }
  for (int j = 0; j < kPassive; ++j) {
    dc.Wt_d.segment<2>(2 * j) =
        t.Sd[j].transpose() * t.Wunit[j] * f(j) + t.S[j].transpose() * dc.W_d[j];
  }
  dc.tau_d = -(friction_matrix(p) * acc.qdd) + spring_rate(x, p);
  return dc;
}

LinearizationTerms second_order_terms(const SystemState& x, const Vec4& z, const RobotParams& p) {
  const StateTerms t = compute_terms(x, p);
  const GeneralizedMatrices gm = assemble(t, x, p);
  const ReducedBaseTerms rb = reduced_base_terms(t, gm);

  LinearizationTerms lt;
  lt.Mb = rb.Mb;
  lt.F1 = rb.F1;
  lt.D1 = rb.D1;
  lt.B = rb.B;

  const Mat6 Mbt = gm.M.topRightCorner<6, 6>();
  const Mat6 Mtt_inv = block_inverse(gm.M.bottomRightCorner<6, 6>());
  const Eigen::LDLT<Mat6> Mb_ldlt(rb.Mb);

  Vec6 u = Vec6::Zero();
  u.head<4>() = z;
  const Vec12 Wapp = applied_wrench(t, z);
  lt.acc.Vd = rb.F1 + Mb_ldlt.solve(rb.D1 * u);
  lt.acc.qdd = Mtt_inv * (Wapp.tail<6>() + gm.tau.tail<6>() - gm.h.tail<6>() - gm.g.tail<6>() -
                          Mbt.transpose() * lt.acc.Vd);

  const DerivativeCascade dc = derivative_cascade(t, x, z, lt.acc, p);
  Vec6 Wb_d = Vec6::Zero();
  for (int i = 0; i < kPropellers; ++i) Wb_d += dc.W_d[i];
  const Vec6 Rb = Wb_d - dc.hb_d - dc.gb_d - dc.Mbb_d * lt.acc.Vd - dc.Mbt_d * lt.acc.qdd;
  const Vec6 Rt = dc.Wt_d + dc.tau_d - dc.ht_d - dc.gt_d - dc.Mbt_d.transpose() * lt.acc.Vd -
                  dc.Mtt_d * lt.acc.qdd;
  lt.F2 = Mb_ldlt.solve(Rb - Mbt * (Mtt_inv * Rt));

  lt.D2 = rb.D1;
  const Wrench W5 = t.Wunit[3] * z(3);
  lt.D2.col(4) = -ad(t.kin.link[3].s1).transpose() * W5;
  lt.D2.col(5) = -ad(t.kin.link[3].s2).transpose() * W5;
  return lt;
}

Mat6 passive_mass(const Vec6& q_t, const Pose& C, const RobotParams& p) {
  SystemState x;
  x.C = C;
  x.q = q_t;
  const StateTerms t = compute_terms(x, p);
  Mat6 Mtt = Mat6::Zero();
  for (int j = 0; j < kPassive; ++j) {
    Mtt.block<2, 2>(2 * j, 2 * j) = t.S[j].transpose() * t.M[j + 1] * t.S[j];
  }
  return Mtt;
}

Mat6 passive_mass_rate(const Vec6& q_t, const Vec6& qd_t, const Pose& C, const RobotParams& p) {
  SystemState x;
  x.C = C;
  x.q = q_t;
  x.qd = qd_t;
  const StateTerms t = compute_terms(x, p);
  Mat6 Mtt_d = Mat6::Zero();
  for (int j = 0; j < kPassive; ++j) {
    const Mat6& M = t.M[j + 1];
    const ScrewBlock& S = t.S[j];
    const ScrewBlock& Sd = t.Sd[j];
    Mtt_d.block<2, 2>(2 * j, 2 * j) =
        Sd.transpose() * M * S + S.transpose() * t.Md[j + 1] * S + S.transpose() * M * Sd;
  }
  return Mtt_d;
}

Mat6 coriolis_passive(const Vec6& q_t, const Vec6& qd_t, const Pose& C, const RobotParams& p) {
  SystemState x;
  x.C = C;
  x.q = q_t;
  x.qd = qd_t;
  const StateTerms t = compute_terms(x, p);
  Mat6 Cm = Mat6::Zero();
  for (int j = 0; j < kPassive; ++j) {
    const Mat6& M = t.M[j + 1];
    const Twist s1 = t.S[j].col(0), s2 = t.S[j].col(1);
    const Twist sd1 = t.Sd[j].col(0), sd2 = t.Sd[j].col(1);
    const double e1 = qd_t(2 * j), e2 = qd_t(2 * j + 1);
    const Mat6 a1t = ad(s1).transpose();
    const Mat6 a2t = ad(s2).transpose();
    Eigen::Matrix2d Cj;
    Cj(0, 0) = s1.dot(M * sd1) - s1.dot(a2t * M * s1) * e2;
    Cj(0, 1) = s1.dot(M * sd2) - s1.dot(a2t * M * s2) * e2;
    Cj(1, 0) = s2.dot(M * sd1) - s2.dot(a1t * M * s1) * e1;
    Cj(1, 1) = s2.dot(M * sd2) - s2.dot(a1t * M * s2) * e1;
    Cm.block<2, 2>(2 * j, 2 * j) = Cj;
  }
  return Cm;
}

double kinetic_energy(const SystemState& x, const RobotParams& p) {
  const StateTerms t = compute_terms(x, p);
  double T = 0.0;
  for (int b = 0; b < 5; ++b) T += 0.5 * t.Vb[b].dot(t.M[b] * t.Vb[b]);
  return T;
}

double potential_energy(const SystemState& x, const RobotParams& p) {
  const Kinematics kin = forward_kinematics(p, x.C, x.q, x.q5);
  double U = p.m_b * p.g * x.C(2, 3);
  for (int i = 0; i < kPropellers; ++i) U += p.link_mass(i) * p.g * kin.link[i].com(2, 3);
  return U;
}

}  // namespace omav
