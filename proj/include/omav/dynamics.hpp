#pragma once

#include <array>

#include "omav/model.hpp"

namespace omav {

using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat12 = Eigen::Matrix<double, 12, 12>;

/// x = (C, q_t, V, qd_t, q5). V is the spatial twist of the base.
struct SystemState {
  Pose C = Pose::Identity();
  Vec6 q = Vec6::Zero();
  Twist V = Twist::Zero();
  Vec6 qd = Vec6::Zero();
  Vec2 q5 = Vec2::Zero();
};

/// Gravity acceleration twist (0, 0, 0, 0, 0, -g)
Twist gravity_twist(const RobotParams& p);

/// Per-state quantities shared by every dynamics routine.
/// Bodies are ordered base, link 2, 3, 4, 5.
struct StateTerms {
  Kinematics kin;
  std::array<Mat6, 5> M;    // world-referred inertias
  std::array<Twist, 5> Vb;  // body twists
  std::array<Mat6, 5> Md;   // inertia time derivatives
  std::array<ScrewBlock, 3> S;
  std::array<ScrewBlock, 3> Sd;
  std::array<Twist, 3> Vj1;     // twist of the intermediate frame
  std::array<Wrench, 4> Wunit;  // world thrust wrench per unit thrust
};

StateTerms compute_terms(const SystemState& x, const RobotParams& p);

struct GeneralizedMatrices {
  Mat12 M;
  Vec12 h;
  Vec12 g;    // gravity, on the left-hand side
  Vec12 tau;  // joint friction and spring torques
};

GeneralizedMatrices assemble(const SystemState& x, const RobotParams& p);
GeneralizedMatrices assemble(const StateTerms& t, const SystemState& x, const RobotParams& p);

/// Generalized thrust wrench for thrusts f = (f2..f5)
Vec12 applied_wrench(const StateTerms& t, const Vec4& f);

struct Accel {
  Twist Vd = Twist::Zero();
  Vec6 qdd = Vec6::Zero();
};

/// u = (f2, f3, f4, f5, u_v1, u_v2); the tilt rates do not enter the accelerations.
Accel forward_dynamics_dense(const SystemState& x, const Vec6& u, const RobotParams& p);
Accel forward_dynamics_aba(const SystemState& x, const Vec6& u, const RobotParams& p);
Accel forward_dynamics_aba(const StateTerms& t, const SystemState& x, const Vec4& f,
                           const RobotParams& p);

struct ReducedBaseTerms {
  Mat6 Mb;
  Vec6 F1;
  Mat6 D1;
  std::array<Mat6, 3> B;
};

/// Vd = F1 + Mb^{-1} D1 u
ReducedBaseTerms reduced_base_terms(const SystemState& x, const RobotParams& p);
ReducedBaseTerms reduced_base_terms(const StateTerms& t, const GeneralizedMatrices& g);

struct DerivativeCascade {
  std::array<Mat6, 5> Md;
  std::array<Mat6, 5> Mdd;
  std::array<ScrewBlock, 3> Sd;
  std::array<ScrewBlock, 3> Sdd;
  Mat6 Mbb_d;
  Mat6 Mbt_d;
  Mat6 Mtt_d;
  Vec6 hb_d;
  Vec6 gb_d;
  Vec6 ht_d;
  Vec6 gt_d;
  std::array<Wrench, 4> W_d;  // thrust wrench rates
  Vec6 Wt_d;                  // rate of the joint-projected thrust
  Vec6 tau_d;
};

/// Time derivatives along the trajectory through x with input u, input
/// rates w = (thrust rates, tilt rates) and accelerations acc.
DerivativeCascade derivative_cascade(const SystemState& x, const Vec6& u, const Accel& acc,
                                     const RobotParams& p, const Vec6& w = Vec6::Zero());
DerivativeCascade derivative_cascade(const StateTerms& t, const SystemState& x, const Vec4& f,
                                     const Accel& acc, const RobotParams& p,
                                     const Vec6& w = Vec6::Zero());

struct LinearizationTerms {
  Mat6 Mb;
  Vec6 F1;
  Mat6 D1;
  Vec6 F2;
  Mat6 D2;
  std::array<Mat6, 3> B;
  Accel acc;  // model accelerations at u = (z, 0)
};

/// Vdd = F2 + Mb^{-1} D2 w with the thrusts held by the precompensator states z.
LinearizationTerms second_order_terms(const SystemState& x, const Vec4& z, const RobotParams& p);

/// Passive-joint Coriolis matrix with the base at rest.
Mat6 coriolis_passive(const Vec6& q_t, const Vec6& qd_t, const Pose& C, const RobotParams& p);

/// Passive-joint mass matrix and its time derivative with the base at rest.
Mat6 passive_mass(const Vec6& q_t, const Pose& C, const RobotParams& p);
Mat6 passive_mass_rate(const Vec6& q_t, const Vec6& qd_t, const Pose& C, const RobotParams& p);

double kinetic_energy(const SystemState& x, const RobotParams& p);
double potential_energy(const SystemState& x, const RobotParams& p);

}  // namespace omav
