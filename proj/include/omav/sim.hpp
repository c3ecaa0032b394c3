#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "omav/control.hpp"
#include "omav/equilibrium.hpp"

namespace omav {

struct NoiseParams {
  double l = 0.1;   // standard deviation of each draw
  double k = 45.0;  // filter pole
};

/// beta' = beta + dt (-k beta + mu), mu ~ N(0, l^2 I)
Vec6 noise_step(const Vec6& beta, double dt, const NoiseParams& np, std::mt19937_64& rng);

/// Scales every physical parameter except g by (1 + eps).
RobotParams perturb_params(const RobotParams& p, double eps);

struct Setpoint {
  double t_start = 0.0;
  Pose pose = Pose::Identity();
};

struct Scenario {
  RobotParams params;  // nominal, used by the controller
  Gains gains;
  SystemState initial;
  Vec4 z0 = Vec4::Zero();
  std::vector<Setpoint> schedule;
  double duration = 130.0;
  double dt = 1e-3;
  double sample_rate = 100.0;
  bool noise = true;
  NoiseParams noise_params;
  double perturbation = 0.05;
  std::uint64_t seed = 1;
};

/// Two-phase run: 1 m step along y for 60 s, then a 60 deg rotation about y.
Scenario default_scenario(Pjd pjd = Pjd::Two);

struct SimState {
  double t = 0.0;
  SystemState x;
  ControllerState c;
  Vec6 beta = Vec6::Zero();
};

struct StepContext {
  const RobotParams* plant;
  const RobotParams* nominal;
  const Gains* gains;
  Pose setpoint = Pose::Identity();
  ControlLaw law = ControlLaw::Tracking;
  /// Tilt rate in rad/s above which a step is split into RK4 substeps that
  /// turn q5 by at most max_tilt_increment each; 0 disables substepping.
  double substep_tilt_rate = 25.0;
  double max_tilt_increment = 0.01;
};

/// One Lie-group RK4 step of plant, precompensator and integral state with
/// the noise held at s.beta. Tilt rates above substep_tilt_rate only occur
/// while the active tilt passes its gimbal configuration, and those steps
/// are subdivided.
/// Returns the control evaluated at the step start.
/// Throws SingularityError, and NumericalError on non-finite states.
ControlOutput step(SimState& s, const StepContext& ctx, double dt);

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TelemetryRecord {
  double t;
  Vec3 e_phi;
  Vec3 e_p;
  Twist V;
  Vec6 q;
  Vec6 qd;
  Vec2 q5;
  Vec4 f;
  Vec2 u_v;
  Vec6 beta;
  double sum_f;  // applied thrust sum
  double det_D2;
  double cond_D2;
  Twist v;
  Vec6 w;
};

struct PhaseSummary {
  double t_start = 0.0;
  double t_end = 0.0;
  double final_e_p = 0.0;
  double final_e_phi = 0.0;
  double mean_e_p_last5 = 0.0;
  double mean_e_phi_last5 = 0.0;
  double mean_sum_f_last5 = 0.0;
  std::optional<double> settling_time;  // after which both errors stay below 1e-2
};

struct RunSummary {
  bool completed = true;
  std::string abort_reason;
  std::optional<double> abort_time;
  std::uint64_t seed = 0;
  std::vector<PhaseSummary> phases;
  double final_sum_f = 0.0;
  double min_abs_det_D2 = 0.0;
  double max_cond_D2 = 0.0;
};

struct RunResult {
  std::vector<TelemetryRecord> records;
  RunSummary summary;
};

using StepObserver = std::function<void(const SimState&, const ControlOutput&)>;

/// Closed-loop run with the plant perturbed and noisy as the scenario says.
/// SingularityError and NumericalError are caught and recorded in the summary.
RunResult run_scenario(const Scenario& sc, const StepObserver& observer = {});

/// Thrusts and tilt that keep the base at rest (V = 0, Vdot = 0) for the
/// given joint state. Throws NonConvergence.
struct ZeroDynamicsInit {
  Vec4 z;
  Vec2 q5;
  double residual;
};
ZeroDynamicsInit zero_dynamics_init(const Pose& C, const Vec6& q_t, const Vec6& qd_t,
                                    const RobotParams& p);

struct ZeroDynamicsRecord {
  double t;
  Vec6 q;
  Vec6 qd;
  Twist V;
  Vec4 z;
  Vec2 q5;
  double lyapunov;
  bool bound_ok;
};

struct ZeroDynamicsResult {
  std::vector<ZeroDynamicsRecord> records;
  double max_V_norm = 0.0;  // over every integration step
  bool completed = true;
  std::string abort_reason;
};

/// Stops and reports an incomplete run if the base twist drifts above 1e-4.
ZeroDynamicsResult run_zero_dynamics(const Pose& C, const Vec6& q_t, const Vec6& qd_t,
                                     const RobotParams& p, double T, double dt = 1e-3,
                                     double sample_rate = 100.0);

/// Energy of the passive links relative to their hanging equilibrium.
double passive_lyapunov(const SystemState& x, const Vec6& q_te, const RobotParams& p);

/// Sufficient bound for decreasing passive energy on the zero-dynamics manifold.
bool zd_bound_monitor(const SystemState& x, const Vec4& z, const Vec6& q_te,
                      const RobotParams& p);

/// sum(f PJD1) / sum(f PJD2) at base pose C
double compare_thrust(const Pose& C, const RobotParams& p);

}  // namespace omav
