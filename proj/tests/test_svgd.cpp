#include <doctest.h>

#include "steinmcl/svgd.hpp"
#include "test_helpers.hpp"

using namespace steinmcl;

TEST_CASE("kernel of a pose with itself is exactly one") {
  SplitMix64 rng(3);
  const KernelParams kp;
  for (int t = 0; t < 20; ++t) {
    const Pose p = test::random_pose(rng);
    CHECK(kernel(p, p, kp) == 1.0);
  }
}

TEST_CASE("kernel default weights") {
  const KernelParams kp;
  CHECK(kp.sigma_r == 5.0);
  CHECK(kp.sigma_t == 2.5);
}

TEST_CASE("kernel value of a one meter offset") {
  const KernelParams kp;
  Pose a, b;
  b.t = Vec3(1.0, 0.0, 0.0);
  CHECK(kernel(a, b, kp) == doctest::Approx(std::exp(-2.5)).epsilon(1e-12));
}

TEST_CASE("kernel symmetry and bounds") {
  SplitMix64 rng(5);
  const KernelParams kp;
  for (int t = 0; t < 500; ++t) {
    const Pose a = test::random_pose(rng, 2.0, 2.0);
    const Pose b = test::random_pose(rng, 2.0, 2.0);
    const double kab = kernel(a, b, kp);
    const double kba = kernel(b, a, kp);
    CHECK(std::abs(kab - kba) < 1e-12);
    CHECK(kab > 0.0);
    CHECK(kab <= 1.0);
  }
}

TEST_CASE("kernel gradient vanishes at zero distance") {
  SplitMix64 rng(7);
  const KernelParams kp;
  const Pose p = test::random_pose(rng);
  CHECK(kernel_grad(p, p, kp).norm() < 1e-12);
}

TEST_CASE("kernel gradient matches finite differences in tangent coordinates") {
  SplitMix64 rng(11);
  const KernelParams kp;
  const double h = 1e-6;
  for (int trial = 0; trial < 200; ++trial) {
    const Pose a = test::random_pose(rng, 1.0, 2.0);
    Tangent d = test::random_tangent(rng, 0.2, 0.25);
    if (d.norm() >= 0.5) d *= 0.4 / d.norm();
    const Pose b = a * se3_exp(d);
    const Tangent grad = kernel_grad(a, b, kp);
    for (int c = 0; c < 6; ++c) {
      Tangent dp = d, dm = d;
      dp[c] += h;
      dm[c] -= h;
      const double fd =
          (kernel(a, a * se3_exp(dp), kp) - kernel(a, a * se3_exp(dm), kp)) / (2.0 * h);
      CHECK(std::abs(grad[c] - fd) < 1e-4);
    }
  }
}

TEST_CASE("kernel gradient is antisymmetric at small distances") {
  SplitMix64 rng(13);
  const KernelParams kp;
  for (int trial = 0; trial < 200; ++trial) {
    const Pose a = test::random_pose(rng, 1.0, 2.0);
    Tangent d = test::random_tangent(rng, 0.03, 0.04);
    if (d.norm() >= 0.1) d *= 0.08 / d.norm();
    const Pose b = a * se3_exp(d);
    CHECK((kernel_grad(a, b, kp) + kernel_grad(b, a, kp)).norm() < 1e-3);
  }
}

TEST_CASE("phi with a self-only neighbor list is exactly the own step") {
  SplitMix64 rng(17);
  const KernelParams kp;
  std::vector<Pose> poses = {test::random_pose(rng)};
  std::vector<Tangent> steps = {test::random_tangent(rng, 0.3, 0.5)};
  const std::int32_t self[] = {0};
  const Tangent phi = compute_phi(0, poses, steps, std::span<const std::int32_t>(self, 1), kp);
  CHECK((phi - steps[0]).norm() == 0.0);
}

TEST_CASE("coincident particles with equal steps move identically") {
  SplitMix64 rng(19);
  const KernelParams kp;
  const Pose p = test::random_pose(rng);
  const Tangent psi = test::random_tangent(rng, 0.2, 0.3);
  std::vector<Pose> poses = {p, p};
  std::vector<Tangent> steps = {psi, psi};
  const std::int32_t nbrs[] = {0, 1};
  for (std::int32_t i = 0; i < 2; ++i) {
    const Tangent phi = compute_phi(i, poses, steps, std::span<const std::int32_t>(nbrs, 2), kp);
    CHECK((phi - psi).norm() < 1e-12);
  }
}

TEST_CASE("zero-step particles at a small offset repel each other") {
  const KernelParams kp;
  Pose a, b;
  b.t = Vec3(0.2, 0.0, 0.0);
  std::vector<Pose> poses = {a, b};
  std::vector<Tangent> steps = {Tangent::Zero(), Tangent::Zero()};
  const std::int32_t nbrs[] = {0, 1};
  const Tangent phi0 = compute_phi(0, poses, steps, std::span<const std::int32_t>(nbrs, 2), kp);
  const Tangent phi1 = compute_phi(1, poses, steps, std::span<const std::int32_t>(nbrs, 2), kp);
  // d_01 points along +x, so particle 0 is pushed to -x and particle 1 to +x.
  CHECK(phi0[3] < 0.0);
  CHECK(phi1[3] > 0.0);
}

TEST_CASE("apply_updates with zero phi is a bitwise no-op") {
  SplitMix64 rng(23);
  std::vector<Pose> poses;
  for (int i = 0; i < 10; ++i) poses.push_back(test::random_pose(rng));
  const std::vector<Pose> before = poses;
  const std::vector<Tangent> phis(poses.size(), Tangent::Zero());
  apply_updates(poses, phis);
  for (std::size_t i = 0; i < poses.size(); ++i) {
    CHECK((poses[i].R - before[i].R).cwiseAbs().maxCoeff() == 0.0);
    CHECK((poses[i].t - before[i].t).norm() == 0.0);
  }
}

TEST_CASE("apply_updates is deterministic") {
  SplitMix64 rng(29);
  std::vector<Pose> a, b;
  std::vector<Tangent> phis;
  for (int i = 0; i < 32; ++i) {
    const Pose p = test::random_pose(rng);
    a.push_back(p);
    b.push_back(p);
    phis.push_back(test::random_tangent(rng, 0.3, 0.4));
  }
  apply_updates(a, phis);
  apply_updates(b, phis);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK((a[i].R - b[i].R).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a[i].t - b[i].t).norm() == 0.0);
  }
}

TEST_CASE("single particle SVGD equals a plain Gauss-Newton iterate") {
  SplitMix64 rng(31);
  const KernelParams kp;
  const Pose start = test::random_pose(rng);
  const Tangent psi = test::random_tangent(rng, 0.2, 0.5);

  std::vector<Pose> poses = {start};
  std::vector<Tangent> steps = {psi};
  std::vector<Tangent> phis(1);
  const std::int32_t counts[] = {1};
  const std::int32_t idx[] = {0};
  compute_phis(poses, steps, std::span<const std::int32_t>(idx, 1),
               std::span<const std::int32_t>(counts, 1), 1, kp, phis);
  apply_updates(poses, phis);

  const Pose direct = start * se3_exp(psi);
  CHECK((poses[0].R - direct.R).cwiseAbs().maxCoeff() == 0.0);
  CHECK((poses[0].t - direct.t).norm() == 0.0);
}

TEST_CASE("coincident particles with no likelihood signal stay coincident") {
  SplitMix64 rng(37);
  const KernelParams kp;
  const Pose p = test::random_pose(rng);
  const std::size_t n = 100;
  std::vector<Pose> poses(n, p);
  std::vector<Tangent> steps(n, Tangent::Zero());
  std::vector<Tangent> phis(n);
  // Fully connected neighbor lists.
  std::vector<std::int32_t> idx(n * n);
  std::vector<std::int32_t> counts(n, static_cast<std::int32_t>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) idx[i * n + j] = static_cast<std::int32_t>(j);

  compute_phis(poses, steps, idx, counts, static_cast<int>(n), kp, phis);
  apply_updates(poses, phis);

  // Repulsion is exactly zero at zero distance: no spontaneous diversity.
  for (std::size_t i = 1; i < n; ++i) {
    CHECK((poses[i].R - poses[0].R).cwiseAbs().maxCoeff() == 0.0);
    CHECK((poses[i].t - poses[0].t).norm() == 0.0);
  }
  CHECK((poses[0].t - p.t).norm() < 1e-12);
}
