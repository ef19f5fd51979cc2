#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "steinmcl/filter.hpp"

namespace steinmcl::ref {

// Plain serial implementations of the hot per-frame kernels. They share the
// per-particle math with the production paths but none of the parallel
// orchestration (sorting, chunked reductions, OpenMP), and exist so tests can
// pin the OpenMP kernels against a simple baseline and the bench can compare
// throughput. Results must match the production kernels bit for bit.

void evaluate_all(const GaussianCloud& map, const NearestNeighborField& nnf,
                  const GaussianCloud& scan, std::span<const Pose> poses,
                  const GicpParams& params, std::span<Tangent> step_out,
                  std::span<double> log_lik_out, std::span<std::int32_t> n_matched_out);

void evaluate_likelihoods(const GaussianCloud& map, const NearestNeighborField& nnf,
                          const GaussianCloud& scan, std::span<const Pose> poses,
                          const GicpParams& params, std::span<double> log_lik_out,
                          std::span<std::int32_t> n_matched_out);

void compute_phis(std::span<const Pose> poses, std::span<const Tangent> steps,
                  const NeighborGraph& graph, const KernelParams& kp,
                  std::span<Tangent> phi_out);

void apply_updates(std::span<Pose> poses, std::span<const Tangent> phis);

NeighborStats update_neighbors(ParticleSet& set, const LshConfig& cfg,
                               const KernelParams& kp, std::uint64_t pass_seed,
                               const Aabb& bounds);

void smooth(std::span<double> log_post, const NeighborGraph& graph, int iters,
            double floor = k_default_log_post_floor);

// Exact kernel K-nearest-neighbor lists (including self), the oracle for LSH
// recall measurements. O(n^2); test-scale inputs only.
std::vector<std::vector<std::int32_t>> brute_force_kernel_knn(
    std::span<const Pose> poses, int k, const KernelParams& kp);

}  // namespace steinmcl::ref
