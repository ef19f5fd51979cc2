#pragma once

#include <cstdint>
#include <span>

#include "steinmcl/se3.hpp"

namespace steinmcl {

// Exponential kernel on SE3 with a diagonal weighting matrix
// W = diag(sigma_r, sigma_r, sigma_r, sigma_t, sigma_t, sigma_t):
//   k(a, b) = exp(-d^T W d),  d = log(a^-1 b).
struct KernelParams {
  double sigma_r = 5.0;  // 1/rad
  double sigma_t = 2.5;  // 1/m
  // Gain on the kernel-gradient (repulsion) term in the particle update; the
  // kernel and its gradient themselves are unaffected. At low particle
  // densities the raw gradient term dwarfs the Gauss-Newton attraction (the
  // kernel sum no longer averages over a crowd), which keeps clouds too coarse
  // to pick a sharp representative; scaling it down restores the balance.
  double repulsion_gain = 1.0;

  Vec6 weights() const {
    Vec6 w;
    w << sigma_r, sigma_r, sigma_r, sigma_t, sigma_t, sigma_t;
    return w;
  }
};

inline double kernel_of_tangent(const Tangent& d, const KernelParams& kp) {
  const double q = kp.sigma_r * d.head<3>().squaredNorm() +
                   kp.sigma_t * d.tail<3>().squaredNorm();
  return std::exp(-q);
}

inline double kernel(const Pose& a, const Pose& b, const KernelParams& kp) {
  return kernel_of_tangent(se3_log(a.inverse() * b), kp);
}

// The tangent translation never exceeds the Euclidean offset (the V matrix of
// the log is a contraction), so sigma_t * |t_b - t_a|^2 bounds the kernel
// exponent from below. Beyond ~110 even float underflows to exactly zero,
// which lets hot loops skip the SE3 log for hopeless pairs without changing
// any result.
inline bool kernel_underflows(const Pose& a, const Pose& b, const KernelParams& kp) {
  return kp.sigma_t * (b.t - a.t).squaredNorm() > 110.0;
}

// Gradient of k(a, b) w.r.t. the tangent coordinates d of b around a
// (b = a * exp(d)): -2 k W d. The chain rule to b's own right tangent is the
// inverse right Jacobian of SE3, approximated by the identity; within the
// kernel's effective support the approximation error is second order in d.
inline Tangent kernel_grad(const Pose& a, const Pose& b, const KernelParams& kp) {
  const Tangent d = se3_log(a.inverse() * b);
  const double k = kernel_of_tangent(d, kp);
  Tangent g;
  g.head<3>() = -2.0 * k * kp.sigma_r * d.head<3>();
  g.tail<3>() = -2.0 * k * kp.sigma_t * d.tail<3>();
  return g;
}

// Update direction of particle i: the kernel-weighted mean of the neighbor
// Gauss-Newton steps plus normalized kernel-gradient repulsion,
//   phi_i = sum_j (k_ij psi_j + grad_j k_ij) / sum_j k_ij,
// over the neighbor list (which always contains i itself, so the denominator
// is at least 1).
Tangent compute_phi(std::int32_t i, std::span<const Pose> poses,
                    std::span<const Tangent> steps,
                    std::span<const std::int32_t> neighbor_indices,
                    const KernelParams& kp);

// phi for every particle, against a frozen pose snapshot. Neighbor lists are
// passed in the flat fixed-stride layout of NeighborGraph.
void compute_phis(std::span<const Pose> poses, std::span<const Tangent> steps,
                  std::span<const std::int32_t> neighbor_idx,
                  std::span<const std::int32_t> neighbor_count, int k_stride,
                  const KernelParams& kp, std::span<Tangent> phi_out);

// T_i <- T_i * exp(phi_i) for every particle; rotations are renormalized when
// drift exceeds the usual threshold. Each particle is written exactly once.
void apply_updates(std::span<Pose> poses, std::span<const Tangent> phis);

}  // namespace steinmcl
