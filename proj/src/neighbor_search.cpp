#include "steinmcl/neighbor_search.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <parallel/algorithm>
#endif

#include "steinmcl/reduce.hpp"

namespace steinmcl {

namespace {

// Component primes of the integer-tuple hash; the first three follow the
// classic 3D spatial hash, the rest extend it to the 6-dimensional tuple.
constexpr std::uint64_t k_hash_primes[6] = {73856093ull, 19349663ull, 83492791ull,
                                            49979687ull, 39916801ull, 15485863ull};

}  // namespace

std::uint64_t lsh_hash(const Pose& pose, const Pose& frame, const Vec6& noise,
                       const LshConfig& cfg, const KernelParams& kp) {
  const Tangent d = se3_log(frame.inverse() * pose);
  const Vec6 zeta = cfg.alpha * kp.weights().cwiseProduct(d) + noise;
  std::uint64_t h = 0;
  for (int c = 0; c < 6; ++c) {
    const auto cell = static_cast<std::int64_t>(std::floor(zeta[c]));
    h ^= static_cast<std::uint64_t>(cell) * k_hash_primes[c];
  }
  return h;
}

Pose random_lsh_frame(SplitMix64& rng, const Aabb& bounds) {
  Pose frame;
  frame.R = random_rotation(rng);
  for (int a = 0; a < 3; ++a) {
    frame.t[a] = uniform_range(rng, bounds.min[a], bounds.max[a]);
  }
  return frame;
}

std::int32_t next_prime_at_least(std::int32_t n) {
  if (n <= 2) return 2;
  std::int32_t p = n | 1;
  for (;; p += 2) {
    bool prime = true;
    for (std::int32_t d = 3; d * d <= p; d += 2) {
      if (p % d == 0) {
        prime = false;
        break;
      }
    }
    if (prime) return p;
  }
}

NeighborStats update_neighbors(ParticleSet& set, const LshConfig& cfg,
                               const KernelParams& kp, std::uint64_t pass_seed,
                               const Aabb& bounds) {
  const std::size_t n = set.size();
  NeighborStats stats;
  if (n == 0) return stats;
  if (set.neighbors.size() != n || set.neighbors.k_max != cfg.k_neighbors) {
    throw std::invalid_argument("update_neighbors: graph not initialized for this set");
  }

  SplitMix64 rng(pass_seed);
  const Pose frame = random_lsh_frame(rng, bounds);
  const Vec6 noise = cfg.noise_sigma * normal6(rng);

  const std::int32_t n_buckets =
      cfg.n_buckets > 0
          ? cfg.n_buckets
          : next_prime_at_least(static_cast<std::int32_t>(
                std::ceil(cfg.buckets_factor * static_cast<double>(n))));
  stats.n_buckets = n_buckets;

  // Key layout: [bucket | per-pass random priority | particle index]. Keys are
  // distinct, so the sorted order is unique and runs of equal buckets are
  // contiguous with a pass-random member order. The priority decides which
  // members stay visible when a bucket overflows its capacity.
  const int idx_bits = std::max(1, static_cast<int>(std::bit_width(n - 1)));
  const int h_bits = std::max(1, static_cast<int>(std::bit_width(static_cast<std::uint32_t>(n_buckets - 1))));
  const int prio_bits = std::max(0, 64 - h_bits - idx_bits);
  const std::uint64_t idx_mask = (std::uint64_t(1) << idx_bits) - 1;
  const std::uint64_t prio_seed = mix_seed(pass_seed, 0x70726f6974ull);

  std::vector<std::uint64_t> keys(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    const std::uint64_t h =
        lsh_hash(set.poses[static_cast<std::size_t>(i)], frame, noise, cfg, kp) %
        static_cast<std::uint64_t>(n_buckets);
    const std::uint64_t prio =
        prio_bits > 0 ? mix_seed(prio_seed, static_cast<std::uint64_t>(i)) >> (64 - prio_bits)
                      : 0;
    keys[static_cast<std::size_t>(i)] =
        (h << (prio_bits + idx_bits)) | (prio << idx_bits) | static_cast<std::uint64_t>(i);
  }

#ifdef _OPENMP
  __gnu_parallel::sort(keys.begin(), keys.end());
#else
  std::sort(keys.begin(), keys.end());
#endif

  // member_of[p]: particle stored at sorted position p.
  std::vector<std::int32_t> member_of(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < static_cast<std::int64_t>(n); ++p) {
    member_of[static_cast<std::size_t>(p)] =
        static_cast<std::int32_t>(keys[static_cast<std::size_t>(p)] & idx_mask);
  }

  if (cfg.reorder_particles) {
    set.reorder(member_of);
#pragma omp parallel for schedule(static)
    for (std::int64_t p = 0; p < static_cast<std::int64_t>(n); ++p) {
      member_of[static_cast<std::size_t>(p)] = static_cast<std::int32_t>(p);
    }
  }

  // Bucket runs over sorted positions.
  const int shift = prio_bits + idx_bits;
  std::vector<std::int32_t> run_begin(n), run_end(n);
  for (std::size_t p = 0; p < n; ++p) {
    run_begin[p] = (p > 0 && (keys[p] >> shift) == (keys[p - 1] >> shift))
                       ? run_begin[p - 1]
                       : static_cast<std::int32_t>(p);
  }
  for (std::size_t p = n; p-- > 0;) {
    run_end[p] = (p + 1 < n && (keys[p] >> shift) == (keys[p + 1] >> shift))
                     ? run_end[p + 1]
                     : static_cast<std::int32_t>(p + 1);
  }

  // Cached kernel values go stale as poses move; refresh before eviction
  // decisions compare against them.
  auto& graph = set.neighbors;
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    graph.refresh(static_cast<std::size_t>(i), set.poses, kp);
  }

  // Gather: each particle scans the visible members of its bucket and updates
  // only its own list.
#pragma omp parallel for schedule(dynamic, 1024)
  for (std::int64_t p = 0; p < static_cast<std::int64_t>(n); ++p) {
    const std::int32_t i = member_of[static_cast<std::size_t>(p)];
    const std::int32_t begin = run_begin[static_cast<std::size_t>(p)];
    const std::int32_t end =
        std::min(run_end[static_cast<std::size_t>(p)], begin + cfg.bucket_capacity);
    const Pose inv_i = set.poses[static_cast<std::size_t>(i)].inverse();
    for (std::int32_t q = begin; q < end; ++q) {
      const std::int32_t j = member_of[static_cast<std::size_t>(q)];
      if (j == i) continue;
      float k_ij = 0.0f;
      if (!kernel_underflows(set.poses[static_cast<std::size_t>(i)],
                             set.poses[static_cast<std::size_t>(j)], kp)) {
        k_ij = static_cast<float>(kernel_of_tangent(
            se3_log(inv_i * set.poses[static_cast<std::size_t>(j)]), kp));
      }
      graph.offer(static_cast<std::size_t>(i), j, k_ij);
    }
  }

  // Pass statistics.
  stats.occupancy_hist.assign(static_cast<std::size_t>(cfg.bucket_capacity) + 2, 0);
  for (std::size_t p = 0; p < n;) {
    const std::int64_t size = run_end[p] - run_begin[p];
    ++stats.buckets_used;
    const std::size_t bin =
        std::min<std::size_t>(static_cast<std::size_t>(size), stats.occupancy_hist.size() - 1);
    ++stats.occupancy_hist[bin];
    if (size > cfg.bucket_capacity) stats.overflow_dropped += size - cfg.bucket_capacity;
    p = static_cast<std::size_t>(run_end[p]);
  }
  const double kernel_sum = chunked_sum(n, [&](std::size_t i) {
    double s = 0.0;
    for (const float k : graph.kernels_of(i)) s += k;
    return s;
  });
  const double entries = chunked_sum(n, [&](std::size_t i) {
    return static_cast<double>(graph.count[i]);
  });
  stats.mean_kernel = entries > 0 ? kernel_sum / entries : 0.0;
  return stats;
}

}  // namespace steinmcl
