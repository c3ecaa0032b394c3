#include "omav/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "omav/errors.hpp"

namespace omav {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Deriv {
  Twist Cd;
  Vec6 qd;
  Twist Vd;
  Vec6 qdd;
  Vec2 q5d;
  Vec4 zd;
  Vec6 eid;
};

Deriv field(const SimState& s, const StepContext& ctx, ControlOutput* out) {
  const ControlOutput co =
      compute_control(s.x, s.c, ctx.setpoint, *ctx.gains, *ctx.nominal, ctx.law);
  const Vec4 f = s.c.z + s.beta.head<4>();
  const StateTerms t = compute_terms(s.x, *ctx.plant);
  const Accel acc = forward_dynamics_aba(t, s.x, f, *ctx.plant);
  if (out) *out = co;
  return Deriv{s.x.V, s.x.qd, acc.Vd, acc.qdd, co.w.tail<2>() + s.beta.tail<2>(),
               co.w.head<4>(), co.e_int_rate};
}

SimState advance(const SimState& s0, const Deriv& k, double h, const Twist& omega) {
  SimState s = s0;
  s.x.C = exp_step(omega, 1.0) * s0.x.C;
  s.x.q += h * k.qd;
  s.x.V += h * k.Vd;
  s.x.qd += h * k.qdd;
  s.x.q5 += h * k.q5d;
  s.c.z += h * k.zd;
  s.c.e_int += h * k.eid;
  return s;
}

// Truncated inverse of the exponential's differential, exact to the order RK4 needs.
Twist dexpinv(const Twist& omega, const Twist& V) {
  const Mat6 a = ad(omega);
  const Twist aV = a * V;
  return V - 0.5 * aV + (1.0 / 12.0) * (a * aV);
}

bool finite(const SimState& s) {
  return s.x.C.allFinite() && s.x.q.allFinite() && s.x.V.allFinite() && s.x.qd.allFinite() &&
         s.x.q5.allFinite() && s.c.z.allFinite() && s.c.e_int.allFinite();
}

const Pose& active_setpoint(const std::vector<Setpoint>& schedule, double t) {
  static const Pose identity = Pose::Identity();
  const Pose* pose = &identity;
  for (const Setpoint& sp : schedule) {
    if (sp.t_start <= t + 1e-9) pose = &sp.pose;
  }
  return *pose;
}

Vec3 angle_error(const Mat3& Re, const Mat3& R) {
  const Vec3 d = euler_xyz(Re) - euler_xyz(R);
  return Vec3(wrap_angle(d.x()), wrap_angle(d.y()), wrap_angle(d.z()));
}

TelemetryRecord make_record(const SimState& s, const ControlOutput& co, const Pose& Ce) {
  TelemetryRecord r;
  r.t = s.t;
  r.e_phi = angle_error(Ce.topLeftCorner<3, 3>(), s.x.C.topLeftCorner<3, 3>());
  r.e_p = Ce.topRightCorner<3, 1>() - s.x.C.topRightCorner<3, 1>();
  r.V = s.x.V;
  r.q = s.x.q;
  r.qd = s.x.qd;
  r.q5 = s.x.q5;
  r.f = s.c.z;
  r.u_v = co.w.tail<2>();
  r.beta = s.beta;
  r.sum_f = (s.c.z + s.beta.head<4>()).sum();
  r.det_D2 = co.det;
  r.cond_D2 = co.cond;
  r.v = co.v;
  r.w = co.w;
  return r;
}

void summarize(const Scenario& sc, RunResult& res) {
  RunSummary& sm = res.summary;
  const auto& recs = res.records;
  if (!recs.empty()) sm.final_sum_f = recs.back().sum_f;
  sm.min_abs_det_D2 = INFINITY;
  sm.max_cond_D2 = 0.0;
  for (const auto& r : recs) {
    sm.min_abs_det_D2 = std::min(sm.min_abs_det_D2, std::abs(r.det_D2));
    sm.max_cond_D2 = std::max(sm.max_cond_D2, r.cond_D2);
  }
  const double t_last = recs.empty() ? 0.0 : recs.back().t;
  for (std::size_t i = 0; i < sc.schedule.size(); ++i) {
    PhaseSummary ph;
    ph.t_start = sc.schedule[i].t_start;
    ph.t_end = i + 1 < sc.schedule.size() ? sc.schedule[i + 1].t_start : sc.duration;
    if (ph.t_start > t_last) break;
    const bool last_phase = i + 1 == sc.schedule.size();
    std::vector<const TelemetryRecord*> in;
    for (const auto& r : recs) {
      const bool inside = r.t >= ph.t_start - 1e-9 &&
                          (last_phase ? r.t <= ph.t_end + 1e-9 : r.t < ph.t_end - 1e-9);
      if (inside) in.push_back(&r);
    }
    if (in.empty()) continue;
    ph.final_e_p = in.back()->e_p.norm();
    ph.final_e_phi = in.back()->e_phi.norm();
    double sp = 0.0, sa = 0.0, sf = 0.0;
    int n = 0;
    for (const auto* r : in) {
      if (r->t >= in.back()->t - 5.0 + 1e-9) {
        sp += r->e_p.norm();
        sa += r->e_phi.norm();
        sf += r->sum_f;
        ++n;
      }
    }
    ph.mean_e_p_last5 = sp / n;
    ph.mean_e_phi_last5 = sa / n;
    ph.mean_sum_f_last5 = sf / n;
    for (std::size_t k = in.size(); k-- > 0;) {
      if (in[k]->e_p.norm() >= 1e-2 || in[k]->e_phi.norm() >= 1e-2) {
        if (k + 1 < in.size()) ph.settling_time = in[k + 1]->t - ph.t_start;
        break;
      }
      if (k == 0) ph.settling_time = 0.0;
    }
    sm.phases.push_back(ph);
  }
}

}  // namespace

Vec6 noise_step(const Vec6& beta, double dt, const NoiseParams& np, std::mt19937_64& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  Vec6 mu;
  for (int i = 0; i < 6; ++i) mu(i) = np.l * N(rng);
  return beta + dt * (-np.k * beta + mu);
}

RobotParams perturb_params(const RobotParams& p, double eps) {
  if (!(eps > -1.0)) throw ConfigError("perturbation must be greater than -1");
  const double s = 1.0 + eps;
  RobotParams q = p;
  for (double* v : {&q.m_b, &q.m_p, &q.m_a, &q.a, &q.c, &q.I_px, &q.I_py, &q.I_pz, &q.I_bx,
                    &q.I_by, &q.I_bz, &q.b_fx, &q.b_fy}) {
    *v *= s;
  }
  for (double& k : q.k) k *= s;
  return q;
}

Scenario default_scenario(Pjd pjd) {
  Scenario sc;
  sc.params.pjd = pjd;
  sc.initial.C = make_pose(from_euler_xyz(Vec3(-60.0, -30.0, 60.0) * kDeg), Vec3(1, -1, -1));
  sc.initial.q = Vec6::Constant(0.1);
  sc.initial.q5 = Vec2::Constant(0.1);
  sc.z0 = 1.05 * pjd2_thrust(sc.params);
  sc.schedule = {{0.0, translation(0, 1, 0)},
                 {60.0, make_pose(rot_y(60.0 * kDeg), Vec3(0, 1, 0))}};
  sc.duration = 130.0;
  return sc;
}

namespace {

void rk4_substep(SimState& s, const StepContext& ctx, const Deriv& k1, double dt) {
  const Twist O1 = dt * k1.Cd;
  const Deriv k2 = field(advance(s, k1, 0.5 * dt, 0.5 * O1), ctx, nullptr);
  const Twist O2 = dt * dexpinv(0.5 * O1, k2.Cd);
  const Deriv k3 = field(advance(s, k2, 0.5 * dt, 0.5 * O2), ctx, nullptr);
  const Twist O3 = dt * dexpinv(0.5 * O2, k3.Cd);
  const Deriv k4 = field(advance(s, k3, dt, O3), ctx, nullptr);
  const Twist O4 = dt * dexpinv(O3, k4.Cd);

  const double h = dt / 6.0;
  s.x.C = exp_step((O1 + 2.0 * O2 + 2.0 * O3 + O4) / 6.0, 1.0) * s.x.C;
  s.x.q += h * (k1.qd + 2.0 * k2.qd + 2.0 * k3.qd + k4.qd);
  s.x.V += h * (k1.Vd + 2.0 * k2.Vd + 2.0 * k3.Vd + k4.Vd);
  s.x.qd += h * (k1.qdd + 2.0 * k2.qdd + 2.0 * k3.qdd + k4.qdd);
  s.x.q5 += h * (k1.q5d + 2.0 * k2.q5d + 2.0 * k3.q5d + k4.q5d);
  s.c.z += h * (k1.zd + 2.0 * k2.zd + 2.0 * k3.zd + k4.zd);
  s.c.e_int += h * (k1.eid + 2.0 * k2.eid + 2.0 * k3.eid + k4.eid);
}

}  // namespace

ControlOutput step(SimState& s, const StepContext& ctx, double dt) {
  constexpr int kMaxSubsteps = 1024;
  ControlOutput c0;
  Deriv k1 = field(s, ctx, &c0);
  double left = dt;
  for (int n = 0; left > 0.0; ++n) {
    double h = left;
    const double rate = k1.q5d.cwiseAbs().maxCoeff();
    if (ctx.substep_tilt_rate > 0.0 && rate > ctx.substep_tilt_rate &&
        rate * h > ctx.max_tilt_increment) {
      h = std::max(ctx.max_tilt_increment / rate, dt / kMaxSubsteps);
      // split the remainder evenly instead of leaving a sliver
      h = left / std::ceil(left / h);
    }
    rk4_substep(s, ctx, k1, h);
    left = n + 1 >= kMaxSubsteps ? 0.0 : left - h;
    if (left <= 1e-12 * dt) break;
    if (!finite(s)) break;
    k1 = field(s, ctx, nullptr);
  }
  s.c.e_int = s.c.e_int.cwiseMax(-10.0).cwiseMin(10.0);
  for (int i = 0; i < 6; ++i) s.x.q(i) = wrap_angle(s.x.q(i));
  for (int i = 0; i < 2; ++i) s.x.q5(i) = wrap_angle(s.x.q5(i));
  s.t += dt;
  if (!finite(s)) throw NumericalError("non-finite state at t=" + std::to_string(s.t));
  return c0;
}

RunResult run_scenario(const Scenario& sc, const StepObserver& observer) {
  if (!(sc.dt > 0.0) || !(sc.duration > 0.0) || !(sc.sample_rate > 0.0)) {
    throw ConfigError("dt, duration and sample rate must be positive");
  }
  for (std::size_t i = 1; i < sc.schedule.size(); ++i) {
    if (!(sc.schedule[i].t_start > sc.schedule[i - 1].t_start)) {
      throw ConfigError("set-point times must be increasing");
    }
  }
  sc.params.validate();
  sc.gains.validate();
  const RobotParams nominal = sc.params;
  const RobotParams plant = sc.perturbation != 0.0 ? perturb_params(nominal, sc.perturbation)
                                                   : nominal;
  StepContext ctx{&plant, &nominal, &sc.gains};
  std::mt19937_64 rng(sc.seed);

  SimState s;
  s.x = sc.initial;
  s.c.z = sc.z0;

  RunResult res;
  res.summary.seed = sc.seed;
  const long long nsteps = std::llround(sc.duration / sc.dt);
  const long long decim = std::max(1LL, std::llround(1.0 / (sc.sample_rate * sc.dt)));
  res.records.reserve(static_cast<std::size_t>(nsteps / decim + 2));
  for (long long n = 0; n <= nsteps; ++n) {
    s.t = n * sc.dt;
    ctx.setpoint = active_setpoint(sc.schedule, s.t);
    try {
      if (n == nsteps) {
        const ControlOutput co = compute_control(s.x, s.c, ctx.setpoint, sc.gains, nominal);
        if (n % decim == 0) res.records.push_back(make_record(s, co, ctx.setpoint));
        break;
      }
      const SimState before = s;
      const ControlOutput co = step(s, ctx, sc.dt);
      if (observer) observer(before, co);
      if (n % decim == 0) res.records.push_back(make_record(before, co, ctx.setpoint));
    } catch (const SingularityError& e) {
      res.summary.completed = false;
      res.summary.abort_reason = std::string("singularity: ") + e.what();
      res.summary.abort_time = n * sc.dt;
      break;
    } catch (const NumericalError& e) {
      res.summary.completed = false;
      res.summary.abort_reason = std::string("numerical: ") + e.what();
      res.summary.abort_time = n * sc.dt;
      break;
    }
    if (sc.noise) s.beta = noise_step(s.beta, sc.dt, sc.noise_params, rng);
  }
  summarize(sc, res);
  return res;
}

ZeroDynamicsInit zero_dynamics_init(const Pose& C, const Vec6& q_t, const Vec6& qd_t,
                                    const RobotParams& p) {
  const EquilibriumSolution guess = pjd2_equilibrium(C, p);
  SystemState x;
  x.C = C;
  x.q = q_t;
  x.qd = qd_t;
  auto residual = [&](const Vec6& y) {
    SystemState xs = x;
    xs.q5 = y.tail<2>();
    const ReducedBaseTerms rb = reduced_base_terms(xs, p);
    Vec6 u = Vec6::Zero();
    u.head<4>() = y.head<4>();
    return Vec6(rb.F1 + rb.Mb.ldlt().solve(rb.D1 * u));
  };
  Vec6 y;
  y << guess.f, guess.q5;
  Vec6 r = residual(y);
  for (int it = 0; it < 100 && r.norm() > 1e-13; ++it) {
    Mat6 J;
    for (int c = 0; c < 6; ++c) {
      Vec6 yc = y;
      const double h = 1e-7 * std::max(1.0, std::abs(y(c)));
      yc(c) += h;
      J.col(c) = (residual(yc) - r) / h;
    }
    const Vec6 dy = J.fullPivLu().solve(-r);
    double alpha = 1.0;
    Vec6 yn = y + dy;
    Vec6 rn = residual(yn);
    while (rn.norm() >= r.norm() && alpha > 1e-6) {
      alpha *= 0.5;
      yn = y + alpha * dy;
      rn = residual(yn);
    }
    if (rn.norm() >= r.norm()) break;
    y = yn;
    r = rn;
  }
  if (!(r.norm() < 1e-9)) {
    throw NonConvergence("zero-dynamics initialization did not converge", r.norm());
  }
  return {y.head<4>(), Vec2(wrap_angle(y(4)), wrap_angle(y(5))), r.norm()};
}

double passive_lyapunov(const SystemState& x, const Vec6& q_te, const RobotParams& p) {
  const StateTerms t = compute_terms(x, p);
  SystemState xe = x;
  xe.q = q_te;
  const Kinematics ke = forward_kinematics(p, x.C, q_te, x.q5);
  double V = 0.0;
  for (int j = 0; j < kPassive; ++j) {
    V += 0.5 * t.Vb[j + 1].dot(t.M[j + 1] * t.Vb[j + 1]);
    V += p.m_p * p.g * (t.kin.link[j].com(2, 3) - ke.link[j].com(2, 3));
  }
  return V;
}

bool zd_bound_monitor(const SystemState& x, const Vec4& z, const Vec6& q_te,
                      const RobotParams& p) {
  const Vec6 dq = x.q - q_te;
  if (dq.cwiseAbs().maxCoeff() == 0.0) return true;
  double d3 = 0.0;
  for (int j = 0; j < kPassive; ++j) {
    d3 = std::max(d3, std::abs(p.k[j] * std::sin(dq(2 * j + 1))));
  }
  if (d3 == 0.0) return true;
  Vec3 ft = z.head<3>();
  if (p.pjd == Pjd::Two) ft -= pjd2_thrust(p).head<3>();
  const double lam = std::min(p.b_fx, p.b_fy);
  return ft.norm() * d3 < lam * x.qd.norm();
}

ZeroDynamicsResult run_zero_dynamics(const Pose& C, const Vec6& q_t, const Vec6& qd_t,
                                     const RobotParams& p, double T, double dt,
                                     double sample_rate) {
  p.validate();
  const ZeroDynamicsInit init = zero_dynamics_init(C, q_t, qd_t, p);
  const Vec6 q_te = solve_equilibrium(C, p).q;
  Gains gains;
  gains.integral = false;
  StepContext ctx{&p, &p, &gains, C, ControlLaw::ZeroDynamics};

  SimState s;
  s.x.C = C;
  s.x.q = q_t;
  s.x.qd = qd_t;
  s.x.q5 = init.q5;
  s.c.z = init.z;

  ZeroDynamicsResult res;
  const long long nsteps = std::llround(T / dt);
  const long long decim = std::max(1LL, std::llround(1.0 / (sample_rate * dt)));
  for (long long n = 0; n <= nsteps; ++n) {
    s.t = n * dt;
    res.max_V_norm = std::max(res.max_V_norm, s.x.V.norm());
    if (n % decim == 0) {
      res.records.push_back({s.t, s.x.q, s.x.qd, s.x.V, s.c.z, s.x.q5,
                             passive_lyapunov(s.x, q_te, p),
                             zd_bound_monitor(s.x, s.c.z, q_te, p)});
    }
    if (n == nsteps) break;
    if (s.x.V.norm() > 1e-4) {
      res.completed = false;
      res.abort_reason = "base twist left the zero-dynamics manifold at t=" + std::to_string(s.t);
      break;
    }
    try {
      step(s, ctx, dt);
    } catch (const std::runtime_error& e) {
      res.completed = false;
      res.abort_reason = e.what();
      break;
    }
  }
  return res;
}

double compare_thrust(const Pose& C, const RobotParams& p) {
  return pjd1_equilibrium(C, p).f.sum() / pjd2_equilibrium(C, p).f.sum();
}

}  // namespace omav
