#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "steinmcl/neighbor_graph.hpp"
#include "steinmcl/se3.hpp"

namespace steinmcl {

// Structure-of-sequences particle storage: poses, normalized log posteriors
// (log-sum-exp == 0) and the K-neighbor graph. `id` is the stable particle
// identity; the neighbor search may reorder storage in place for locality, and
// no operation ever creates or destroys a particle.
struct ParticleSet {
  std::vector<Pose> poses;
  std::vector<double> log_post;
  std::vector<std::int32_t> id;
  NeighborGraph neighbors;

  std::size_t size() const { return poses.size(); }

  // In-place permutation: slot p takes the particle previously at
  // old_of_new[p]. Neighbor indices are remapped accordingly.
  void reorder(std::span<const std::int32_t> old_of_new);
};

}  // namespace steinmcl
