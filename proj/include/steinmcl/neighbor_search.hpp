#pragma once

#include <cstdint>
#include <vector>

#include "steinmcl/gaussian_cloud.hpp"
#include "steinmcl/particle_set.hpp"
#include "steinmcl/rng.hpp"
#include "steinmcl/svgd.hpp"

namespace steinmcl {

struct LshConfig {
  double alpha = 0.1;         // grid cell scale in zeta space (see README)
  double noise_sigma = 0.5;   // grid cells; one shared dither draw per pass
  double buckets_factor = 2.0;
  int n_buckets = 0;          // 0 = next prime >= buckets_factor * n_particles
  int bucket_capacity = 64;
  int k_neighbors = 20;
  bool reorder_particles = true;  // sort particle storage into bucket order
};

// Stable-distribution LSH over SE3: tangent coordinates of the pose in a
// random frame, scaled by alpha * W and dithered, floored to a 6-tuple of
// integers and hashed by XOR of component-wise prime products. The caller
// reduces the result modulo the bucket count.
std::uint64_t lsh_hash(const Pose& pose, const Pose& frame, const Vec6& noise,
                       const LshConfig& cfg, const KernelParams& kp);

// Uniform random rotation, translation uniform in `bounds`.
Pose random_lsh_frame(SplitMix64& rng, const Aabb& bounds);

struct NeighborStats {
  std::int64_t n_buckets = 0;
  std::int64_t buckets_used = 0;
  std::int64_t overflow_dropped = 0;           // candidates beyond bucket capacity
  std::vector<std::int64_t> occupancy_hist;    // bucket size -> count, last bin open
  double mean_kernel = 0.0;                    // mean refreshed kernel over all entries
};

// One pass of the iterative neighbor particle search: draw a fresh random
// frame and dither, distribute particles into buckets, then offer every
// co-bucket particle (up to bucket_capacity, in a per-pass random priority
// order) to each particle's list. Weakest-kernel entries are evicted, self
// never. Deterministic for a fixed pass_seed under any thread count.
NeighborStats update_neighbors(ParticleSet& set, const LshConfig& cfg,
                               const KernelParams& kp, std::uint64_t pass_seed,
                               const Aabb& bounds);

std::int32_t next_prime_at_least(std::int32_t n);

}  // namespace steinmcl
