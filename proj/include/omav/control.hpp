#pragma once

#include "omav/dynamics.hpp"

namespace omav {

struct Gains {
  Mat6 Kp = Mat6::Identity() * 0.1;
  Mat6 Ka = Mat6::Identity() * 14.9433;
  Mat6 Kd = Mat6::Identity() * 5.5576;
  Mat6 Ki = Mat6::Identity() * 60.0;
  bool integral = true;

  static Gains defaults() { return Gains{}; }
  /// Diagonal, positive, and every per-axis error polynomial is Hurwitz
  /// (s^2 + kd s + ka, or s^3 + kd s^2 + ka s + ki with the integral term).
  bool hurwitz() const;
  /// Throws ConfigError when hurwitz() fails.
  void validate() const;
};

struct ControllerState {
  Vec4 z = Vec4::Zero();      // thrust precompensator states
  Vec6 e_int = Vec6::Zero();  // integral of zeta1e - zeta1
};

/// zeta1e = -Kp P(Ce^{-T} Ec C^T)
Twist kinematic_reference(const Pose& C, const Pose& Ce, const Mat6& Kp);

struct ReferenceDerivatives {
  Twist d1;
  Twist d2;
};

/// First and second time derivatives of kinematic_reference along
/// Cdot = hat(zeta1) C with base acceleration zeta2.
ReferenceDerivatives reference_derivatives(const Pose& C, const Pose& Ce, const Twist& zeta1,
                                           const Twist& zeta2, const Mat6& Kp);

Twist virtual_input(const Twist& zeta1, const Twist& zeta2, const Twist& zeta1e,
                    const ReferenceDerivatives& ref, const Gains& g, const Vec6& e_int);

struct Feedback {
  Vec6 w;  // (thrust rates, tilt rates)
  double det;
  double cond;
};

/// Solves D2 w = Mb (v - F2). Throws SingularityError when cond(D2) > 1e8 or |det(D2)| < 1e-12.
Feedback linearizing_feedback(const LinearizationTerms& lt, const Twist& v);

/// z' = z + dt wbar; the tilt rates drive q5 in the plant.
ControllerState precompensator_step(const ControllerState& cs, const Vec6& w, double dt);

enum class ControlLaw { Tracking, ZeroDynamics };

struct ControlOutput {
  Vec6 w = Vec6::Zero();
  Twist v = Twist::Zero();
  Twist zeta1e = Twist::Zero();
  Twist zeta2 = Twist::Zero();  // model base acceleration
  Vec6 e_int_rate = Vec6::Zero();
  double det = 0.0;
  double cond = 0.0;
};

/// Full feedback evaluation on the nominal model.
/// ZeroDynamics pins the base output at rest: v = -Kd zeta2 - Ka zeta1, which
/// is zero on the zero-dynamics manifold and damps integration drift off it.
ControlOutput compute_control(const SystemState& x, const ControllerState& cs, const Pose& Ce,
                              const Gains& g, const RobotParams& nominal,
                              ControlLaw law = ControlLaw::Tracking);

}  // namespace omav
