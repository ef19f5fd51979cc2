#include "steinmcl/reference.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace steinmcl::ref {

void evaluate_all(const GaussianCloud& map, const NearestNeighborField& nnf,
                  const GaussianCloud& scan, std::span<const Pose> poses,
                  const GicpParams& params, std::span<Tangent> step_out,
                  std::span<double> log_lik_out, std::span<std::int32_t> n_matched_out) {
  const int min_matched = static_cast<int>(
      std::ceil(params.min_match_fraction * static_cast<double>(scan.size())));
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const GnSystem sys = evaluate(map, nnf, scan, poses[i]);
    const double misses = static_cast<double>(scan.size()) - sys.n_matched;
    log_lik_out[i] = sys.n_matched < min_matched
                         ? k_unmatched_log_lik
                         : sys.log_lik - params.miss_cost * misses;
    n_matched_out[i] = sys.n_matched;
    if (sys.n_matched == 0) {
      step_out[i].setZero();
    } else {
      step_out[i] = solve_step(sys, params.damping_scale * sys.H.trace() / 6.0,
                               params.limits);
    }
  }
}

void evaluate_likelihoods(const GaussianCloud& map, const NearestNeighborField& nnf,
                          const GaussianCloud& scan, std::span<const Pose> poses,
                          const GicpParams& params, std::span<double> log_lik_out,
                          std::span<std::int32_t> n_matched_out) {
  const int min_matched = static_cast<int>(
      std::ceil(params.min_match_fraction * static_cast<double>(scan.size())));
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const Mat3& r = poses[i].R;
    double ll = 0.0;
    int matched = 0;
    for (std::size_t k = 0; k < scan.size(); ++k) {
      const Vec3 p_world = poses[i] * scan.mu[k];
      const std::int32_t m = nnf.lookup_nearest(p_world);
      if (m == NearestNeighborField::k_empty) continue;
      const Vec3 e = map.mu[static_cast<std::size_t>(m)] - p_world;
      const Mat3 cov =
          map.sigma[static_cast<std::size_t>(m)] + r * scan.sigma[k] * r.transpose();
      ll -= e.dot(cov.inverse() * e);
      ++matched;
    }
    if (matched < min_matched || matched == 0) {
      log_lik_out[i] = k_unmatched_log_lik;
    } else {
      log_lik_out[i] =
          ll - params.miss_cost * (static_cast<double>(scan.size()) - matched);
    }
    n_matched_out[i] = matched;
  }
}

void compute_phis(std::span<const Pose> poses, std::span<const Tangent> steps,
                  const NeighborGraph& graph, const KernelParams& kp,
                  std::span<Tangent> phi_out) {
  for (std::size_t i = 0; i < poses.size(); ++i) {
    phi_out[i] = compute_phi(static_cast<std::int32_t>(i), poses, steps,
                             graph.neighbors_of(i), kp);
  }
}

void apply_updates(std::span<Pose> poses, std::span<const Tangent> phis) {
  for (std::size_t i = 0; i < poses.size(); ++i) {
    poses[i] = poses[i] * se3_exp(phis[i]);
    poses[i].renormalize_if_needed();
  }
}

NeighborStats update_neighbors(ParticleSet& set, const LshConfig& cfg,
                               const KernelParams& kp, std::uint64_t pass_seed,
                               const Aabb& bounds) {
  const std::size_t n = set.size();
  NeighborStats stats;
  if (n == 0) return stats;

  // Same pass randomness and key semantics as the production kernel; the
  // distribute/gather below is a plain serial loop over sorted keys.
  SplitMix64 rng(pass_seed);
  const Pose frame = random_lsh_frame(rng, bounds);
  const Vec6 noise = cfg.noise_sigma * normal6(rng);
  const std::int32_t n_buckets =
      cfg.n_buckets > 0
          ? cfg.n_buckets
          : next_prime_at_least(static_cast<std::int32_t>(
                std::ceil(cfg.buckets_factor * static_cast<double>(n))));
  stats.n_buckets = n_buckets;

  const int idx_bits = std::max(1, static_cast<int>(std::bit_width(n - 1)));
  const int h_bits = std::max(1, static_cast<int>(std::bit_width(static_cast<std::uint32_t>(n_buckets - 1))));
  const int prio_bits = std::max(0, 64 - h_bits - idx_bits);
  const std::uint64_t idx_mask = (std::uint64_t(1) << idx_bits) - 1;
  const std::uint64_t prio_seed = mix_seed(pass_seed, 0x70726f6974ull);

  std::vector<std::uint64_t> keys(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t h =
        lsh_hash(set.poses[i], frame, noise, cfg, kp) % static_cast<std::uint64_t>(n_buckets);
    const std::uint64_t prio =
        prio_bits > 0 ? mix_seed(prio_seed, static_cast<std::uint64_t>(i)) >> (64 - prio_bits)
                      : 0;
    keys[i] = (h << (prio_bits + idx_bits)) | (prio << idx_bits) | static_cast<std::uint64_t>(i);
  }
  std::sort(keys.begin(), keys.end());

  std::vector<std::int32_t> member_of(n);
  for (std::size_t p = 0; p < n; ++p) {
    member_of[p] = static_cast<std::int32_t>(keys[p] & idx_mask);
  }
  if (cfg.reorder_particles) {
    set.reorder(member_of);
    std::iota(member_of.begin(), member_of.end(), 0);
  }

  for (std::size_t i = 0; i < n; ++i) set.neighbors.refresh(i, set.poses, kp);

  const int shift = prio_bits + idx_bits;
  stats.occupancy_hist.assign(static_cast<std::size_t>(cfg.bucket_capacity) + 2, 0);
  std::size_t run_begin = 0;
  while (run_begin < n) {
    std::size_t run_end = run_begin + 1;
    while (run_end < n && (keys[run_end] >> shift) == (keys[run_begin] >> shift)) ++run_end;

    const std::size_t visible_end =
        std::min(run_end, run_begin + static_cast<std::size_t>(cfg.bucket_capacity));
    for (std::size_t p = run_begin; p < run_end; ++p) {
      const std::int32_t i = member_of[p];
      const Pose inv_i = set.poses[static_cast<std::size_t>(i)].inverse();
      for (std::size_t q = run_begin; q < visible_end; ++q) {
        const std::int32_t j = member_of[q];
        if (j == i) continue;
        float k_ij = 0.0f;
        if (!kernel_underflows(set.poses[static_cast<std::size_t>(i)],
                               set.poses[static_cast<std::size_t>(j)], kp)) {
          k_ij = static_cast<float>(kernel_of_tangent(
              se3_log(inv_i * set.poses[static_cast<std::size_t>(j)]), kp));
        }
        set.neighbors.offer(static_cast<std::size_t>(i), j, k_ij);
      }
    }

    const std::size_t size = run_end - run_begin;
    ++stats.buckets_used;
    ++stats.occupancy_hist[std::min(size, stats.occupancy_hist.size() - 1)];
    if (size > static_cast<std::size_t>(cfg.bucket_capacity)) {
      stats.overflow_dropped +=
          static_cast<std::int64_t>(size) - cfg.bucket_capacity;
    }
    run_begin = run_end;
  }

  double kernel_sum = 0.0, entries = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (const float k : set.neighbors.kernels_of(i)) kernel_sum += k;
    entries += static_cast<double>(set.neighbors.count[i]);
  }
  stats.mean_kernel = entries > 0 ? kernel_sum / entries : 0.0;
  return stats;
}

void smooth(std::span<double> log_post, const NeighborGraph& graph, int iters,
            double floor) {
  const std::size_t n = log_post.size();
  if (n == 0 || iters == 0) return;
  std::vector<double> p(n), q(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = std::exp(log_post[i]);
  for (int round = 0; round < iters; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto idx = graph.neighbors_of(i);
      const auto kv = graph.kernels_of(i);
      double num = 0.0, den = 0.0;
      for (std::size_t s = 0; s < idx.size(); ++s) {
        num += kv[s] * p[static_cast<std::size_t>(idx[s])];
        den += kv[s];
      }
      q[i] = num / den;
    }
    p.swap(q);
  }
  for (std::size_t i = 0; i < n; ++i) log_post[i] = std::log(p[i]);
  normalize_log_post(log_post, floor);
}

std::vector<std::vector<std::int32_t>> brute_force_kernel_knn(
    std::span<const Pose> poses, int k, const KernelParams& kp) {
  const std::size_t n = poses.size();
  std::vector<std::vector<std::int32_t>> out(n);
  std::vector<std::pair<double, std::int32_t>> cand(n);
#pragma omp parallel for schedule(static) firstprivate(cand)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    const Pose inv_i = poses[static_cast<std::size_t>(i)].inverse();
    for (std::size_t j = 0; j < n; ++j) {
      const double kv =
          j == static_cast<std::size_t>(i)
              ? 1.0
              : kernel_of_tangent(se3_log(inv_i * poses[j]), kp);
      cand[j] = {-kv, static_cast<std::int32_t>(j)};  // sort descending by kernel
    }
    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k), n);
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(keep),
                      cand.end());
    auto& list = out[static_cast<std::size_t>(i)];
    list.reserve(keep);
    for (std::size_t s = 0; s < keep; ++s) list.push_back(cand[s].second);
  }
  return out;
}

}  // namespace steinmcl::ref
