#pragma once

#include <Eigen/Dense>

namespace omav {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// Twists are [angular; linear], wrenches are [torque; force].
using Twist = Vec6;
using Wrench = Vec6;
// Homogeneous transform in SE(3).
using Pose = Mat4;

/// 3x3 skew matrix with skew(w) * u = w x u
Mat3 skew(const Vec3& w);

/// se(3) matrix form of a twist
Mat4 hat(const Twist& v);

/// Inverse of hat. Throws std::invalid_argument if A is not in se(3) within 1e-9.
Twist vee(const Mat4& A);

/// Ad_C = [[R, 0], [[p]R, R]]
Mat6 adjoint(const Pose& C);

/// Ad_C^{-1}, computed in closed form
Mat6 adjoint_inv(const Pose& C);

/// ad_V = [[w^, 0], [v^, w^]]
Mat6 ad(const Twist& V);

/// exp(hat(V) * dt)
Pose exp_step(const Twist& V, double dt);

/// se(3) projection: angular part from the skew part of the rotation block,
/// linear part from the last column.
Twist project_se3(const Mat4& A);

/// E_c = C_e^{-1} C - I
Mat4 left_error(const Pose& Ce, const Pose& C);

Pose pose_inverse(const Pose& C);
Pose make_pose(const Mat3& R, const Vec3& p);
Pose translation(double x, double y, double z);

Mat3 rot_x(double q);
Mat3 rot_y(double q);
Mat3 rot_z(double q);

/// R = Rx(a) Ry(b) Rz(c)
Mat3 from_euler_xyz(const Vec3& abc);
/// Inverse of from_euler_xyz, b in [-pi/2, pi/2]
Vec3 euler_xyz(const Mat3& R);

bool is_pose(const Mat4& C, double tol = 1e-9);

/// Wrap to (-pi, pi]
double wrap_angle(double q);

}  // namespace omav
