#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "steinmcl/se3.hpp"
#include "steinmcl/svgd.hpp"

namespace steinmcl {

// Per-particle neighbor lists: up to k_max (index, kernel value) entries in a
// flat fixed-stride layout, always containing the particle itself. Entries are
// the best candidates seen so far under kernel order; cached kernel values are
// refreshed against current poses at the start of every search pass.
struct NeighborGraph {
  int k_max = 20;
  std::vector<std::int32_t> idx;
  std::vector<float> kval;
  std::vector<std::int32_t> count;

  std::size_t size() const { return count.size(); }

  void init_self(std::size_t n, int k) {
    k_max = k;
    idx.assign(n * static_cast<std::size_t>(k), -1);
    kval.assign(n * static_cast<std::size_t>(k), 0.0f);
    count.assign(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
      idx[i * static_cast<std::size_t>(k)] = static_cast<std::int32_t>(i);
      kval[i * static_cast<std::size_t>(k)] = 1.0f;
    }
  }

  std::span<const std::int32_t> neighbors_of(std::size_t i) const {
    return {idx.data() + i * static_cast<std::size_t>(k_max),
            static_cast<std::size_t>(count[i])};
  }
  std::span<const float> kernels_of(std::size_t i) const {
    return {kval.data() + i * static_cast<std::size_t>(k_max),
            static_cast<std::size_t>(count[i])};
  }

  // Offer candidate j (kernel value k_ij) to particle i's list. Duplicates are
  // ignored; when the list is full the weakest non-self entry is evicted if
  // the candidate beats it, otherwise the candidate is dropped.
  void offer(std::size_t i, std::int32_t j, float k_ij) {
    const std::size_t base = i * static_cast<std::size_t>(k_max);
    const int n = count[i];
    for (int s = 0; s < n; ++s) {
      if (idx[base + static_cast<std::size_t>(s)] == j) return;
    }
    if (n < k_max) {
      idx[base + static_cast<std::size_t>(n)] = j;
      kval[base + static_cast<std::size_t>(n)] = k_ij;
      count[i] = n + 1;
      return;
    }
    const std::int32_t self = static_cast<std::int32_t>(i);
    int weakest = -1;
    float weakest_k = std::numeric_limits<float>::infinity();
    for (int s = 0; s < n; ++s) {
      if (idx[base + static_cast<std::size_t>(s)] == self) continue;
      if (kval[base + static_cast<std::size_t>(s)] < weakest_k) {
        weakest_k = kval[base + static_cast<std::size_t>(s)];
        weakest = s;
      }
    }
    if (weakest >= 0 && k_ij > weakest_k) {
      idx[base + static_cast<std::size_t>(weakest)] = j;
      kval[base + static_cast<std::size_t>(weakest)] = k_ij;
    }
  }

  // Recompute all cached kernel values of particle i against current poses.
  void refresh(std::size_t i, std::span<const Pose> poses, const KernelParams& kp) {
    const std::size_t base = i * static_cast<std::size_t>(k_max);
    const Pose inv_i = poses[i].inverse();
    for (int s = 0; s < count[i]; ++s) {
      const std::int32_t j = idx[base + static_cast<std::size_t>(s)];
      float k = 0.0f;
      if (j == static_cast<std::int32_t>(i)) {
        k = 1.0f;
      } else if (!kernel_underflows(poses[i], poses[static_cast<std::size_t>(j)], kp)) {
        k = static_cast<float>(
            kernel_of_tangent(se3_log(inv_i * poses[static_cast<std::size_t>(j)]), kp));
      }
      kval[base + static_cast<std::size_t>(s)] = k;
    }
  }
};

}  // namespace steinmcl
