#include "steinmcl/svgd.hpp"

#include <stdexcept>

namespace steinmcl {

Tangent compute_phi(std::int32_t i, std::span<const Pose> poses,
                    std::span<const Tangent> steps,
                    std::span<const std::int32_t> neighbor_indices,
                    const KernelParams& kp) {
  const Pose inv_i = poses[static_cast<std::size_t>(i)].inverse();
  Tangent numer = Tangent::Zero();
  double denom = 0.0;
  for (const std::int32_t j : neighbor_indices) {
    if (j == i) {
      // Self: kernel 1, zero gradient.
      numer += steps[static_cast<std::size_t>(j)];
      denom += 1.0;
      continue;
    }
    if (kernel_underflows(poses[static_cast<std::size_t>(i)],
                          poses[static_cast<std::size_t>(j)], kp)) {
      continue;
    }
    const Tangent d = se3_log(inv_i * poses[static_cast<std::size_t>(j)]);
    const double k = kernel_of_tangent(d, kp);
    Tangent grad;
    grad.head<3>() = -2.0 * k * kp.sigma_r * d.head<3>();
    grad.tail<3>() = -2.0 * k * kp.sigma_t * d.tail<3>();
    numer += k * steps[static_cast<std::size_t>(j)] + kp.repulsion_gain * grad;
    denom += k;
  }
  return numer / denom;
}

void compute_phis(std::span<const Pose> poses, std::span<const Tangent> steps,
                  std::span<const std::int32_t> neighbor_idx,
                  std::span<const std::int32_t> neighbor_count, int k_stride,
                  const KernelParams& kp, std::span<Tangent> phi_out) {
  const std::int64_t n = static_cast<std::int64_t>(poses.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const std::size_t base = static_cast<std::size_t>(i) * static_cast<std::size_t>(k_stride);
    const int count = neighbor_count[static_cast<std::size_t>(i)];
    phi_out[static_cast<std::size_t>(i)] =
        compute_phi(static_cast<std::int32_t>(i), poses, steps,
                    neighbor_idx.subspan(base, static_cast<std::size_t>(count)), kp);
  }
}

void apply_updates(std::span<Pose> poses, std::span<const Tangent> phis) {
  if (poses.size() != phis.size()) {
    throw std::invalid_argument("apply_updates: one phi per particle required");
  }
  const std::int64_t n = static_cast<std::int64_t>(poses.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    Pose& p = poses[static_cast<std::size_t>(i)];
    p = p * se3_exp(phis[static_cast<std::size_t>(i)]);
    p.renormalize_if_needed();
  }
}

}  // namespace steinmcl
