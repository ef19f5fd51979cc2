#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>

namespace steinmcl {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// Tangent vectors are ordered [omega; v]: rotation (rad) first, translation (m)
// last. Every module in this project uses this ordering.
using Tangent = Vec6;

inline Mat3 skew(const Vec3& a) {
  Mat3 s;
  s << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
      -a.y(), a.x(), 0.0;
  return s;
}

// Rigid transform in SE3. Rotations are stored as matrices (the GICP
// information matrix needs R * Sigma * R^T directly); perturbations are
// right-multiplied, i.e. T * exp(xi).
struct Pose {
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  static Pose identity() { return {}; }

  Pose inverse() const {
    Pose p;
    p.R = R.transpose();
    p.t = -(p.R * t);
    return p;
  }

  // Max absolute deviation of R^T R from the identity.
  double rotation_drift() const {
    return (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff();
  }

  void orthonormalize() {
    Eigen::Quaterniond q(R);
    q.normalize();
    R = q.toRotationMatrix();
  }

  // Composition chains accumulate drift slowly; only renormalize once it
  // passes the threshold.
  void renormalize_if_needed(double threshold = 1e-7) {
    if (rotation_drift() > threshold) orthonormalize();
  }
};

inline Pose operator*(const Pose& a, const Pose& b) {
  return Pose{a.R * b.R, a.R * b.t + a.t};
}

inline Vec3 operator*(const Pose& a, const Vec3& p) { return a.R * p + a.t; }

inline Pose compose(const Pose& a, const Pose& b) { return a * b; }
inline Pose inverse(const Pose& a) { return a.inverse(); }
inline Vec3 transform_point(const Pose& a, const Vec3& p) { return a * p; }

// SE3 exponential map: Rodrigues rotation plus the V-matrix translation
// coupling. Series branch keeps the coefficients stable for small angles.
inline Pose se3_exp(const Tangent& xi) {
  const Vec3 omega = xi.head<3>();
  const Vec3 v = xi.tail<3>();
  const double theta2 = omega.squaredNorm();
  const double theta = std::sqrt(theta2);

  double a, b, c;  // sin t/t, (1-cos t)/t^2, (t-sin t)/t^3
  if (theta < 1e-4) {
    a = 1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0;
    b = 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0;
    c = 1.0 / 6.0 - theta2 / 120.0 + theta2 * theta2 / 5040.0;
  } else {
    const double s_half = std::sin(0.5 * theta);
    a = std::sin(theta) / theta;
    b = 2.0 * s_half * s_half / theta2;
    c = (1.0 - a) / theta2;
  }

  const Mat3 s = skew(omega);
  const Mat3 s2 = s * s;
  Pose p;
  p.R = Mat3::Identity() + a * s + b * s2;
  p.t = (Mat3::Identity() + b * s + c * s2) * v;
  return p;
}

// SE3 logarithm, inverse of se3_exp away from rotation angle pi. At angles
// within 1e-6 of pi the principal branch is returned deterministically: the
// axis is recovered from the dominant diagonal of the symmetric part, with the
// dominant component taken positive.
inline Tangent se3_log(const Pose& p) {
  const Mat3& r = p.R;
  Vec3 vee(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double s = 0.5 * vee.norm();
  const double cos_theta = std::min(1.0, std::max(-1.0, 0.5 * (r.trace() - 1.0)));
  const double theta = std::atan2(s, cos_theta);

  Vec3 omega;
  if (theta > M_PI - 1e-6) {
    // aa^T = (R + I) / 2 at theta == pi; dominant diagonal picks the axis.
    const Mat3 aat = 0.5 * (r + Mat3::Identity());
    int k = 0;
    aat.diagonal().maxCoeff(&k);
    Vec3 axis;
    axis[k] = std::sqrt(std::max(aat(k, k), 0.0));
    const double inv = axis[k] > 0.0 ? 1.0 / axis[k] : 0.0;
    for (int j = 0; j < 3; ++j) {
      if (j != k) axis[j] = aat(j, k) * inv;
    }
    const double n = axis.norm();
    if (n > 0.0) axis /= n;
    omega = theta * axis;
  } else if (theta < 1e-8) {
    omega = 0.5 * vee;
  } else {
    omega = (theta / (2.0 * std::sin(theta))) * vee;
  }

  const double theta2 = omega.squaredNorm();
  double coef;  // V^{-1} = I - S/2 + coef * S^2
  if (theta2 < 1e-8) {
    coef = 1.0 / 12.0 + theta2 / 720.0;
  } else {
    const double th = std::sqrt(theta2);
    const double a = std::sin(th) / th;
    const double s_half = std::sin(0.5 * th);
    const double b = 2.0 * s_half * s_half / theta2;
    coef = (1.0 - 0.5 * a / b) / theta2;
  }
  const Mat3 sk = skew(omega);
  const Mat3 v_inv = Mat3::Identity() - 0.5 * sk + coef * (sk * sk);

  Tangent xi;
  xi.head<3>() = omega;
  xi.tail<3>() = v_inv * p.t;
  return xi;
}

// Angle of the relative rotation between two poses, in radians.
inline double rotation_angle_between(const Pose& a, const Pose& b) {
  const double c = 0.5 * ((a.R.transpose() * b.R).trace() - 1.0);
  return std::acos(std::min(1.0, std::max(-1.0, c)));
}

}  // namespace steinmcl
