#include "steinmcl/particle_set.hpp"

#include <stdexcept>

namespace steinmcl {

void ParticleSet::reorder(std::span<const std::int32_t> old_of_new) {
  const std::size_t n = size();
  if (old_of_new.size() != n) {
    throw std::invalid_argument("ParticleSet::reorder: permutation size mismatch");
  }
  std::vector<std::int32_t> new_of_old(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < static_cast<std::int64_t>(n); ++p) {
    new_of_old[static_cast<std::size_t>(old_of_new[static_cast<std::size_t>(p)])] =
        static_cast<std::int32_t>(p);
  }

  std::vector<Pose> poses2(n);
  std::vector<double> post2(n);
  std::vector<std::int32_t> id2(n);
  const std::size_t k = static_cast<std::size_t>(neighbors.k_max);
  std::vector<std::int32_t> idx2(n * k);
  std::vector<float> kval2(n * k);
  std::vector<std::int32_t> count2(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < static_cast<std::int64_t>(n); ++p) {
    const std::size_t dst = static_cast<std::size_t>(p);
    const std::size_t src = static_cast<std::size_t>(old_of_new[dst]);
    poses2[dst] = poses[src];
    post2[dst] = log_post[src];
    id2[dst] = id[src];
    count2[dst] = neighbors.count[src];
    for (int s = 0; s < neighbors.count[src]; ++s) {
      idx2[dst * k + static_cast<std::size_t>(s)] =
          new_of_old[static_cast<std::size_t>(neighbors.idx[src * k + static_cast<std::size_t>(s)])];
      kval2[dst * k + static_cast<std::size_t>(s)] =
          neighbors.kval[src * k + static_cast<std::size_t>(s)];
    }
  }
  poses.swap(poses2);
  log_post.swap(post2);
  id.swap(id2);
  neighbors.idx.swap(idx2);
  neighbors.kval.swap(kval2);
  neighbors.count.swap(count2);
}

}  // namespace steinmcl
