#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "steinmcl/se3.hpp"

namespace steinmcl {

// One map/scan point in the GICP point model: mean plus a local-shape
// covariance, eigenvalue-regularized to the plane model.
struct PointGaussian {
  Vec3 mu;
  Mat3 sigma;
};

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  Aabb padded(double pad) const {
    return {min - Vec3::Constant(pad), max + Vec3::Constant(pad)};
  }
};

struct GaussianCloud {
  std::vector<Vec3> mu;
  std::vector<Mat3> sigma;
  Aabb bounds;

  std::size_t size() const { return mu.size(); }
  bool empty() const { return mu.empty(); }
  PointGaussian point(std::size_t i) const { return {mu[i], sigma[i]}; }
};

// Per point, the sample covariance of its k nearest neighbors with eigenvalues
// replaced by lambda_max * (1, 1, epsilon_plane). Means are the input points.
// Requires at least k+1 points and k >= 4.
GaussianCloud estimate_covariances(std::span<const Vec3> points, int k,
                                   double epsilon_plane = 1e-3);

Aabb compute_bounds(std::span<const Vec3> points);

// Voxel-grid downsampling (cell centroids) at a fixed leaf size.
std::vector<Vec3> voxel_downsample(std::span<const Vec3> points, double leaf);

// Downsample to at most max_points by doubling the leaf until it fits.
std::vector<Vec3> downsample_to(std::span<const Vec3> points,
                                std::size_t max_points, double initial_leaf);

}  // namespace steinmcl
