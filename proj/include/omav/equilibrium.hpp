#pragma once

#include "omav/dynamics.hpp"

namespace omav {

struct EquilibriumSolution {
  Vec6 q = Vec6::Zero();
  Vec2 q5 = Vec2::Zero();
  Vec4 f = Vec4::Zero();
  Pjd pjd = Pjd::Two;
  double residual_norm = 0.0;
  int iterations = 0;
};

/// Joint angles that keep a propeller vertical on a base with attitude R.
/// Identical for all links.
Vec2 pjd2_joint_equilibrium(const Mat3& R);

/// Pose-independent equilibrium thrusts of the spring-compensated design.
Vec4 pjd2_thrust(const RobotParams& p);

/// Drag torque on each first passive axis, k_j f_j sin(q_j2)
Vec3 residual_drag(const Vec6& q_t, const Vec4& f, const RobotParams& p);

/// Static balance residual gbar - W_app - tau_spring at rest
Vec12 static_residual(const Pose& C, const Vec6& q_t, const Vec2& q5, const Vec4& f,
                      const RobotParams& p);

EquilibriumSolution pjd2_equilibrium(const Pose& C, const RobotParams& p);

/// Damped Newton solve started from the PJD2 solution.
/// Throws NonConvergence or SingularityError.
EquilibriumSolution pjd1_equilibrium(const Pose& C, const RobotParams& p);

/// Dispatches on p.pjd
EquilibriumSolution solve_equilibrium(const Pose& C, const RobotParams& p);

enum class ForceClass { Minimal, Internal, Deficit };

struct InternalForce {
  double excess;  // sum(f) - m_tot g
  ForceClass cls;
};

/// Throws InvalidThrust for negative entries.
InternalForce internal_force(const Vec4& f, const RobotParams& p);

/// True iff every link z-axis is the world z-axis within tol.
bool verify_vertical(const RobotParams& p, const Pose& C, const Vec6& q_t, const Vec2& q5,
                     double tol = 1e-9);

}  // namespace omav
