#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "steinmcl/se3.hpp"

namespace steinmcl {

// Uniform bucket grid over a point set, CSR layout. Construction-time helper
// for exact k-NN and nearest-within-radius queries (covariance estimation, NNF
// build). Queries scan Chebyshev rings of cells outward and stop once the ring
// lower bound exceeds the current best, so results are exact.
class PointBucketGrid {
 public:
  PointBucketGrid() = default;
  PointBucketGrid(std::span<const Vec3> points, double cell_size);

  struct Neighbor {
    double dist2;
    std::int32_t index;
  };

  // Exact k nearest neighbors of `query`, sorted by ascending distance.
  // Returns fewer than k entries only if the grid holds fewer points.
  void k_nearest(const Vec3& query, int k, std::vector<Neighbor>& out) const;

  // Exact nearest point within max_dist of `query`; -1 if none.
  std::int32_t nearest_within(const Vec3& query, double max_dist) const;

  std::size_t size() const { return points_.size(); }

 private:
  Eigen::Vector3i cell_of(const Vec3& p) const;
  std::int32_t cell_index(const Eigen::Vector3i& c) const {
    return (c.z() * dims_.y() + c.y()) * dims_.x() + c.x();
  }

  std::vector<Vec3> points_;
  std::vector<std::int32_t> order_;    // point indices grouped by cell
  std::vector<std::int32_t> offsets_;  // per-cell start into order_
  Vec3 origin_ = Vec3::Zero();
  Eigen::Vector3i dims_ = Eigen::Vector3i::Zero();
  double cell_size_ = 1.0;
};

}  // namespace steinmcl
