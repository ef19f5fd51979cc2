#include <doctest.h>

#include <Eigen/SVD>

#include "steinmcl/se3.hpp"
#include "test_helpers.hpp"

using namespace steinmcl;

TEST_CASE("exp of zero tangent is the identity") {
  const Pose p = se3_exp(Tangent::Zero());
  CHECK(p.R.isApprox(Mat3::Identity(), 0.0));
  CHECK(p.t.isZero(0.0));
}

TEST_CASE("exp of a z-axis quarter turn maps x to y") {
  Tangent xi = Tangent::Zero();
  xi[2] = M_PI / 2.0;
  const Pose p = se3_exp(xi);
  // Rodrigues evaluated independently through Eigen's angle-axis.
  const Mat3 expected = Eigen::AngleAxisd(M_PI / 2.0, Vec3::UnitZ()).toRotationMatrix();
  CHECK((p.R - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((p.R * Vec3::UnitX() - Vec3::UnitY()).norm() < 1e-12);
  CHECK(p.t.isZero(0.0));
}

TEST_CASE("exp of a pure translation keeps the rotation identity") {
  Tangent xi = Tangent::Zero();
  xi.tail<3>() = Vec3(1.0, 2.0, 3.0);
  const Pose p = se3_exp(xi);
  CHECK(p.R.isApprox(Mat3::Identity(), 1e-15));
  CHECK((p.t - Vec3(1.0, 2.0, 3.0)).norm() < 1e-15);
}

TEST_CASE("log of the identity is zero") {
  CHECK(se3_log(Pose::identity()).norm() == 0.0);
}

TEST_CASE("log inverts exp on a fixed tangent") {
  Tangent xi;
  xi << 0.1, -0.2, 0.3, 1.0, -1.0, 0.5;
  CHECK((se3_log(se3_exp(xi)) - xi).norm() < 1e-9);
}

TEST_CASE("log of a pure translation") {
  Pose p;
  p.t = Vec3(2.0, 0.0, 0.0);
  const Tangent xi = se3_log(p);
  CHECK(xi.head<3>().norm() == 0.0);
  CHECK((xi.tail<3>() - Vec3(2.0, 0.0, 0.0)).norm() < 1e-12);
}

TEST_CASE("compose with identity and transform_point basics") {
  SplitMix64 rng(7);
  const Pose p = test::random_pose(rng);
  const Pose q = compose(p, Pose::identity());
  CHECK((q.R - p.R).cwiseAbs().maxCoeff() == 0.0);
  CHECK((q.t - p.t).norm() == 0.0);

  CHECK((transform_point(Pose::identity(), Vec3(1, 2, 3)) - Vec3(1, 2, 3)).norm() == 0.0);

  const Pose r = p.inverse().inverse();
  CHECK((r.R - p.R).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((r.t - p.t).norm() < 1e-12);
}

TEST_CASE("log(exp(xi)) = xi for random small tangents") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const Tangent xi = test::random_tangent(rng, M_PI - 0.1, 10.0);
    CHECK((se3_log(se3_exp(xi)) - xi).norm() < 1e-9);
  }
}

TEST_CASE("composition is associative on random triples") {
  SplitMix64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const Pose a = test::random_pose(rng);
    const Pose b = test::random_pose(rng);
    const Pose c = test::random_pose(rng);
    const Pose lhs = (a * b) * c;
    const Pose rhs = a * (b * c);
    CHECK((lhs.R - rhs.R).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((lhs.t - rhs.t).norm() < 1e-12);
  }
}

TEST_CASE("exp is a local diffeomorphism at zero") {
  // Numeric Jacobian of the 12-dimensional embedding of exp, rank 6.
  const double h = 1e-6;
  Eigen::Matrix<double, 12, 6> jac;
  for (int c = 0; c < 6; ++c) {
    Tangent plus = Tangent::Zero(), minus = Tangent::Zero();
    plus[c] = h;
    minus[c] = -h;
    const Pose pp = se3_exp(plus), pm = se3_exp(minus);
    Eigen::Matrix<double, 12, 1> dp;
    dp.head<9>() = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(pp.R.data()) -
                   Eigen::Map<const Eigen::Matrix<double, 9, 1>>(pm.R.data());
    dp.tail<3>() = pp.t - pm.t;
    jac.col(c) = dp / (2.0 * h);
  }
  const Eigen::JacobiSVD<Eigen::Matrix<double, 12, 6>> svd(jac);
  CHECK(svd.singularValues()(5) > 0.5);
}

TEST_CASE("log near and at the pi branch") {
  // Just inside the general branch: clean round trip.
  Tangent xi = Tangent::Zero();
  xi.head<3>() = (M_PI - 1e-3) * Vec3(1, 2, 2).normalized();
  CHECK((se3_log(se3_exp(xi)) - xi).norm() < 1e-6);

  // At the branch cut: deterministic principal value, no crash.
  Tangent at_pi = Tangent::Zero();
  at_pi.head<3>() = M_PI * Vec3(0, 0, 1);
  at_pi.tail<3>() = Vec3(0.5, -0.2, 0.1);
  const Pose p = se3_exp(at_pi);
  const Tangent a = se3_log(p);
  const Tangent b = se3_log(p);
  CHECK(a.allFinite());
  CHECK((a - b).norm() == 0.0);
  CHECK(std::abs(a.head<3>().norm() - M_PI) < 1e-6);
  // Principal branch: re-exponentiating reproduces the pose.
  const Pose q = se3_exp(a);
  CHECK((q.R - p.R).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((q.t - p.t).norm() < 1e-6);
}

TEST_CASE("rotation stays orthonormal over long composition chains") {
  SplitMix64 rng(17);
  Pose p;
  for (int i = 0; i < 10000; ++i) {
    p = p * se3_exp(test::random_tangent(rng, 0.05, 0.05));
    p.renormalize_if_needed();
  }
  CHECK(p.rotation_drift() < 1e-9);
  CHECK(p.R.determinant() > 0.0);
}
