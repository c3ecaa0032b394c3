#include "omav/control.hpp"

#include <cmath>

#include "omav/errors.hpp"

namespace omav {

bool Gains::hurwitz() const {
  const Mat6 mats[] = {Kp, Ka, Kd, Ki};
  for (const Mat6& K : mats) {
    if ((K - Mat6(K.diagonal().asDiagonal())).cwiseAbs().maxCoeff() != 0.0) return false;
  }
  for (int i = 0; i < 6; ++i) {
    const double kp = Kp(i, i), ka = Ka(i, i), kd = Kd(i, i), ki = Ki(i, i);
    if (!(kp > 0.0) || !(ka > 0.0) || !(kd > 0.0)) return false;
    if (integral && (!(ki > 0.0) || !(kd * ka > ki))) return false;
  }
  return true;
}

void Gains::validate() const {
  if (!hurwitz()) throw ConfigError("controller gains are not positive diagonal or not Hurwitz");
}

namespace {

Mat4 reference_matrix(const Pose& C, const Pose& Ce) {
  return pose_inverse(Ce).transpose() * left_error(Ce, C) * C.transpose();
}

}  // namespace

Twist kinematic_reference(const Pose& C, const Pose& Ce, const Mat6& Kp) {
  return -Kp * project_se3(reference_matrix(C, Ce));
}

ReferenceDerivatives reference_derivatives(const Pose& C, const Pose& Ce, const Twist& zeta1,
                                           const Twist& zeta2, const Mat6& Kp) {
  const Pose Cei = pose_inverse(Ce);
  const Mat4 CeiT = Cei.transpose();
  const Mat4 E = Cei * C - Mat4::Identity();
  const Mat4 Z1 = hat(zeta1);
  const Mat4 Z2 = hat(zeta2);
  const Mat4 Ed = Cei * Z1 * C;
  const Mat4 Edd = Cei * (Z2 + Z1 * Z1) * C;
  const Mat4 Ct = C.transpose();
  const Mat4 Z1t = Z1.transpose();

  ReferenceDerivatives r;
  r.d1 = -Kp * project_se3(CeiT * (Ed * Ct + E * Ct * Z1t));
  r.d2 = -Kp * project_se3(CeiT * (Edd * Ct + 2.0 * Ed * Ct * Z1t +
                                   E * Ct * (Z1t * Z1t + Z2.transpose())));
  return r;
}

Twist virtual_input(const Twist& zeta1, const Twist& zeta2, const Twist& zeta1e,
                    const ReferenceDerivatives& ref, const Gains& g, const Vec6& e_int) {
  Twist v = ref.d2 + g.Kd * (ref.d1 - zeta2) + g.Ka * (zeta1e - zeta1);
  if (g.integral) v += g.Ki * e_int;
  return v;
}

Feedback linearizing_feedback(const LinearizationTerms& lt, const Twist& v) {
  Feedback fb;
  const Eigen::JacobiSVD<Mat6> svd(lt.D2);
  const auto& sv = svd.singularValues();
  fb.cond = sv(5) > 0.0 ? sv(0) / sv(5) : INFINITY;
  const Eigen::PartialPivLU<Mat6> lu(lt.D2);
  fb.det = lu.determinant();
  if (!(fb.cond <= 1e8) || !(std::abs(fb.det) >= 1e-12)) {
    throw SingularityError("D2 is singular: det=" + std::to_string(fb.det) +
                           " cond=" + std::to_string(fb.cond));
  }
  fb.w = lu.solve(lt.Mb * (v - lt.F2));
  return fb;
}

ControllerState precompensator_step(const ControllerState& cs, const Vec6& w, double dt) {
  ControllerState out = cs;
  out.z += dt * w.head<4>();
  return out;
}

ControlOutput compute_control(const SystemState& x, const ControllerState& cs, const Pose& Ce,
                              const Gains& g, const RobotParams& nominal, ControlLaw law) {
  const LinearizationTerms lt = second_order_terms(x, cs.z, nominal);
  ControlOutput out;
  out.zeta2 = lt.acc.Vd;
  out.zeta1e = kinematic_reference(x.C, Ce, g.Kp);
  if (law == ControlLaw::Tracking) {
    const ReferenceDerivatives ref = reference_derivatives(x.C, Ce, x.V, out.zeta2, g.Kp);
    out.v = virtual_input(x.V, out.zeta2, out.zeta1e, ref, g, cs.e_int);
    if (g.integral) out.e_int_rate = out.zeta1e - x.V;
  } else {
    out.v = -g.Kd * out.zeta2 - g.Ka * x.V;
  }
  const Feedback fb = linearizing_feedback(lt, out.v);
  out.w = fb.w;
  out.det = fb.det;
  out.cond = fb.cond;
  return out;
}

}  // namespace omav
