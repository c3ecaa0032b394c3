#pragma once

#include <array>

#include "omav/spatial.hpp"

namespace omav {

enum class Pjd { One = 1, Two = 2 };

// Propeller links are indexed 0..3 for links 2..5. Links 2..4 hang from
// passive universal joints; link 5 is tilted by an actuated joint.
constexpr int kPropellers = 4;
constexpr int kPassive = 3;

/// Plant parameters. Defaults are the nominal vehicle.
struct RobotParams {
  double m_b = 1.0;
  double m_p = 0.5;
  double m_a = 0.5;
  double a = 0.5;
  double c = 0.25;
  double g = 9.81;
  double I_px = 2.1875e-3;
  double I_py = 2.1875e-3;
  double I_pz = 1.168e-6;
  double I_bx = 8.3333e-3;
  double I_by = 8.3333e-3;
  double I_bz = 1.6667e-2;
  double b_fx = 0.9;
  double b_fy = 0.9;
  std::array<double, 4> k{0.01, -0.01, 0.01, -0.01};  // drag/thrust ratio in m
  Pjd pjd = Pjd::Two;

  double total_mass() const { return m_b + 3.0 * m_p + m_a; }
  double link_mass(int i) const { return i == 3 ? m_a : m_p; }
  /// Throws ConfigError on non-positive physical quantities.
  void validate() const;
};

struct Geometry {
  std::array<Vec3, 4> r;     // joint centers in the base frame
  std::array<int, 4> sigma;  // +1 for links 2 and 5, -1 for links 3 and 4
};

Geometry make_geometry(const RobotParams& p);

struct ConstantScrews {
  std::array<Twist, 4> y1;    // first joint axis, base frame
  std::array<Twist, 4> y2;    // second joint axis at the home configuration
  std::array<Pose, 4> home1;  // intermediate frame at the home configuration
};

ConstantScrews constant_screws(const RobotParams& p);

struct LinkFrames {
  Pose inter;  // after the first joint rotation
  Pose prop;   // propeller frame at the center of rotation
  Pose com;
  Twist s1;    // instantaneous spatial screws
  Twist s2;
};

struct Kinematics {
  Pose base;
  std::array<LinkFrames, 4> link;
};

/// q_t = (q21, q22, q31, q32, q41, q42)
Kinematics forward_kinematics(const RobotParams& p, const Pose& C, const Vec6& q_t,
                              const Vec2& q5);

using ScrewBlock = Eigen::Matrix<double, 6, 2>;

std::array<ScrewBlock, 3> joint_screws(const RobotParams& p, const Pose& C, const Vec6& q_t);

/// CoM-referred spatial inertias
Mat6 base_inertia(const RobotParams& p);
Mat6 passive_link_inertia(const RobotParams& p);
Mat6 active_link_inertia(const RobotParams& p);
Mat6 link_inertia(const RobotParams& p, int i);

/// Ad^{-T} I Ad^{-1}. Throws std::invalid_argument for asymmetric I_com.
Mat6 world_inertia(const Pose& C, const Mat6& I_com);

/// Body wrench of a unit thrust: (0, 0, k, 0, 0, 1)
Wrench unit_thrust_wrench(double k);

struct ActuationMaps {
  Eigen::Matrix<double, 6, 4> Db;
  Eigen::Matrix<double, 6, 3> Dt;
};

ActuationMaps actuation_maps(const RobotParams& p, const Pose& C, const Vec6& q_t,
                             const Vec2& q5);

/// Thrusts of a drag-balanced hover with vertical propellers. Solves the
/// total force, the two tilting moments and the yaw drag balance.
/// Throws ConfigError if sum(k) != 0.
Vec4 minimal_thrust(const RobotParams& p);

/// Spring torque on the first joint axis, -k_j fbar_j sin(q_j2); zero rows for q_j2.
Vec6 spring_torque(const Vec6& q_t, const RobotParams& p);

Mat6 friction_matrix(const RobotParams& p);
Vec6 friction_torque(const Vec6& qd, const RobotParams& p);

}  // namespace omav
