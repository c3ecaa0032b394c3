#include "omav/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace omav {

Mat3 skew(const Vec3& w) {
  Mat3 s;
  // clang-format off
  s <<  0.0,  -w.z(),  w.y(),
        w.z(),  0.0,  -w.x(),
       -w.y(),  w.x(),  0.0;
  // clang-format on
  return s;
}

Mat4 hat(const Twist& v) {
  Mat4 A = Mat4::Zero();
  A.topLeftCorner<3, 3>() = skew(v.head<3>());
  A.topRightCorner<3, 1>() = v.tail<3>();
  return A;
}

Twist vee(const Mat4& A) {
  const double tol = 1e-9;
  const Mat3 W = A.topLeftCorner<3, 3>();
  if ((W + W.transpose()).cwiseAbs().maxCoeff() > tol ||
      A.row(3).cwiseAbs().maxCoeff() > tol) {
    throw std::invalid_argument("vee: matrix is not in se(3)");
  }
  Twist v;
  v << W(2, 1), W(0, 2), W(1, 0), A.topRightCorner<3, 1>();
  return v;
}

Mat6 adjoint(const Pose& C) {
  const Mat3 R = C.topLeftCorner<3, 3>();
  const Vec3 p = C.topRightCorner<3, 1>();
  Mat6 X = Mat6::Zero();
  X.topLeftCorner<3, 3>() = R;
  X.bottomRightCorner<3, 3>() = R;
  X.bottomLeftCorner<3, 3>() = skew(p) * R;
  return X;
}

Mat6 adjoint_inv(const Pose& C) {
  const Mat3 Rt = C.topLeftCorner<3, 3>().transpose();
  const Vec3 p = C.topRightCorner<3, 1>();
  Mat6 X = Mat6::Zero();
  X.topLeftCorner<3, 3>() = Rt;
  X.bottomRightCorner<3, 3>() = Rt;
  X.bottomLeftCorner<3, 3>() = -Rt * skew(p);
  return X;
}

Mat6 ad(const Twist& V) {
  Mat6 X = Mat6::Zero();
  const Mat3 w = skew(V.head<3>());
  X.topLeftCorner<3, 3>() = w;
  X.bottomRightCorner<3, 3>() = w;
  X.bottomLeftCorner<3, 3>() = skew(V.tail<3>());
  return X;
}

Pose exp_step(const Twist& V, double dt) {
  const Vec3 w = V.head<3>() * dt;
  const Vec3 v = V.tail<3>() * dt;
  const double th = w.norm();
  const Mat3 W = skew(w);
  const Mat3 W2 = W * W;
  double a, b, c;  // R = I + aW + bW^2, J = I + bW + cW^2
  if (th < 1e-8) {
    const double t2 = th * th;
    a = 1.0 - t2 / 6.0;
    b = 0.5 - t2 / 24.0;
    c = 1.0 / 6.0 - t2 / 120.0;
  } else {
    a = std::sin(th) / th;
    b = (1.0 - std::cos(th)) / (th * th);
    c = (th - std::sin(th)) / (th * th * th);
  }
  Pose T = Pose::Identity();
  T.topLeftCorner<3, 3>() = Mat3::Identity() + a * W + b * W2;
  T.topRightCorner<3, 1>() = (Mat3::Identity() + b * W + c * W2) * v;
  return T;
}

Twist project_se3(const Mat4& A) {
  const Mat3 S = 0.5 * (A.topLeftCorner<3, 3>() - A.topLeftCorner<3, 3>().transpose());
  Twist v;
  v << S(2, 1), S(0, 2), S(1, 0), A.topRightCorner<3, 1>();
  return v;
}

Mat4 left_error(const Pose& Ce, const Pose& C) {
  return pose_inverse(Ce) * C - Mat4::Identity();
}

Pose pose_inverse(const Pose& C) {
  const Mat3 Rt = C.topLeftCorner<3, 3>().transpose();
  Pose T = Pose::Identity();
  T.topLeftCorner<3, 3>() = Rt;
  T.topRightCorner<3, 1>() = -Rt * C.topRightCorner<3, 1>();
  return T;
}

Pose make_pose(const Mat3& R, const Vec3& p) {
  Pose T = Pose::Identity();
  T.topLeftCorner<3, 3>() = R;
  T.topRightCorner<3, 1>() = p;
  return T;
}

Pose translation(double x, double y, double z) {
  return make_pose(Mat3::Identity(), Vec3(x, y, z));
}

Mat3 rot_x(double q) {
  const double c = std::cos(q), s = std::sin(q);
  Mat3 R;
  R << 1, 0, 0, 0, c, -s, 0, s, c;
  return R;
}

Mat3 rot_y(double q) {
  const double c = std::cos(q), s = std::sin(q);
  Mat3 R;
  R << c, 0, s, 0, 1, 0, -s, 0, c;
  return R;
}

Mat3 rot_z(double q) {
  const double c = std::cos(q), s = std::sin(q);
  Mat3 R;
  R << c, -s, 0, s, c, 0, 0, 0, 1;
  return R;
}

Mat3 from_euler_xyz(const Vec3& abc) {
  return rot_x(abc.x()) * rot_y(abc.y()) * rot_z(abc.z());
}

Vec3 euler_xyz(const Mat3& R) {
  const double sb = std::clamp(R(0, 2), -1.0, 1.0);
  return Vec3(std::atan2(-R(1, 2), R(2, 2)), std::asin(sb), std::atan2(-R(0, 1), R(0, 0)));
}

bool is_pose(const Mat4& C, double tol) {
  const Mat3 R = C.topLeftCorner<3, 3>();
  if ((R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  if (std::abs(R.determinant() - 1.0) > tol) return false;
  return C(3, 0) == 0.0 && C(3, 1) == 0.0 && C(3, 2) == 0.0 && C(3, 3) == 1.0;
}

double wrap_angle(double q) {
  constexpr double pi = std::numbers::pi;
  if (q > -pi && q <= pi) return q;
  double r = std::remainder(q, 2.0 * pi);
  if (r <= -pi) r += 2.0 * pi;
  return r;
}

}  // namespace omav
