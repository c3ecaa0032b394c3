#include "omav/equilibrium.hpp"

#include <cmath>
#include <numbers>

#include "omav/errors.hpp"

namespace omav {

Vec2 pjd2_joint_equilibrium(const Mat3& R) {
  const double r31 = R(2, 0), r32 = R(2, 1), r33 = R(2, 2);
  if (std::abs(std::abs(r31) - 1.0) < 1e-9) {
    // first axis is parallel to gravity, its angle is free
    return Vec2(0.0, std::copysign(std::numbers::pi / 2.0, r31));
  }
  return Vec2(std::atan2(-r32, r33), std::atan2(r31, std::hypot(r32, r33)));
}

Vec4 pjd2_thrust(const RobotParams& p) { return minimal_thrust(p); }

Vec3 residual_drag(const Vec6& q_t, const Vec4& f, const RobotParams& p) {
  Vec3 tau;
  for (int j = 0; j < kPassive; ++j) tau(j) = p.k[j] * f(j) * std::sin(q_t(2 * j + 1));
  return tau;
}

Vec12 static_residual(const Pose& C, const Vec6& q_t, const Vec2& q5, const Vec4& f,
                      const RobotParams& p) {
  SystemState x;
  x.C = C;
  x.q = q_t;
  x.q5 = q5;
  const StateTerms t = compute_terms(x, p);
  const GeneralizedMatrices gm = assemble(t, x, p);
  return gm.g - applied_wrench(t, f) - gm.tau;
}

EquilibriumSolution pjd2_equilibrium(const Pose& C, const RobotParams& p) {
  const Vec2 qe = pjd2_joint_equilibrium(C.topLeftCorner<3, 3>());
  EquilibriumSolution s;
  s.pjd = Pjd::Two;
  for (int j = 0; j < kPassive; ++j) s.q.segment<2>(2 * j) = qe;
  s.q5 = qe;
  s.f = pjd2_thrust(p);
  RobotParams p2 = p;
  p2.pjd = Pjd::Two;
  s.residual_norm = static_residual(C, s.q, s.q5, s.f, p2).norm();
  return s;
}

EquilibriumSolution pjd1_equilibrium(const Pose& C, const RobotParams& p) {
  RobotParams p1 = p;
  p1.pjd = Pjd::One;
  const EquilibriumSolution guess = pjd2_equilibrium(C, p);

  using Vec12r = Eigen::Matrix<double, 12, 1>;
  auto unpack = [](const Vec12r& y, Vec6& q, Vec4& f, Vec2& q5) {
    q = y.head<6>();
    f = y.segment<4>(6);
    q5 = y.tail<2>();
  };
  auto residual = [&](const Vec12r& y) {
    Vec6 q;
    Vec4 f;
    Vec2 q5;
    unpack(y, q, f, q5);
    return static_residual(C, q, q5, f, p1);
  };

  Vec12r y;
  y << guess.q, guess.f, guess.q5;
  Vec12 r = residual(y);
  double rn = r.norm();
  const double tol = 1e-11;
  const double step = 1e-7;
  int it = 0;
  for (; it < 100 && rn > tol; ++it) {
    Mat12 J;
    for (int c = 0; c < 12; ++c) {
      Vec12r yc = y;
      yc(c) += step;
      J.col(c) = (residual(yc) - r) / step;
    }
    const Eigen::FullPivLU<Mat12> lu(J);
    if (lu.rank() < 12) throw SingularityError("equilibrium Jacobian is singular");
    const Vec12r dy = lu.solve(-r);
    double alpha = 1.0;
    Vec12r yn = y + dy;
    Vec12 rnew = residual(yn);
    while (rnew.norm() >= rn && alpha > 1e-6) {
      alpha *= 0.5;
      yn = y + alpha * dy;
      rnew = residual(yn);
    }
    if (rnew.norm() >= rn) break;
    y = yn;
    r = rnew;
    rn = r.norm();
  }
  if (!(rn < 1e-9)) throw NonConvergence("equilibrium Newton solve did not converge", rn);

  EquilibriumSolution s;
  s.pjd = Pjd::One;
  unpack(y, s.q, s.f, s.q5);
  for (int i = 0; i < 6; ++i) s.q(i) = wrap_angle(s.q(i));
  s.q5 = Vec2(wrap_angle(s.q5(0)), wrap_angle(s.q5(1)));
  s.residual_norm = rn;
  s.iterations = it;
  return s;
}

EquilibriumSolution solve_equilibrium(const Pose& C, const RobotParams& p) {
  return p.pjd == Pjd::Two ? pjd2_equilibrium(C, p) : pjd1_equilibrium(C, p);
}

InternalForce internal_force(const Vec4& f, const RobotParams& p) {
  if ((f.array() < 0.0).any()) throw InvalidThrust("thrust magnitudes must be non-negative");
  const double excess = f.sum() - p.total_mass() * p.g;
  ForceClass cls = ForceClass::Deficit;
  if (std::abs(excess) < 1e-9) {
    cls = ForceClass::Minimal;
  } else if (excess > 0.0) {
    cls = ForceClass::Internal;
  }
  return {excess, cls};
}

bool verify_vertical(const RobotParams& p, const Pose& C, const Vec6& q_t, const Vec2& q5,
                     double tol) {
  const Kinematics kin = forward_kinematics(p, C, q_t, q5);
  for (const LinkFrames& L : kin.link) {
    if ((L.com.block<3, 1>(0, 2) - Vec3::UnitZ()).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

}  // namespace omav
