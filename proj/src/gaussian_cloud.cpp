#include "steinmcl/gaussian_cloud.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "steinmcl/point_grid.hpp"

namespace steinmcl {

Aabb compute_bounds(std::span<const Vec3> points) {
  if (points.empty()) throw std::invalid_argument("compute_bounds: empty point set");
  Aabb b{points[0], points[0]};
  for (const Vec3& p : points) {
    b.min = b.min.cwiseMin(p);
    b.max = b.max.cwiseMax(p);
  }
  return b;
}

namespace {

// Heuristic grid cell for k-NN queries: aim for a few points per cell.
double knn_cell_size(const Aabb& bounds, std::size_t n, int k) {
  const Vec3 ext = bounds.extent().cwiseMax(1e-6);
  const double volume = ext.x() * ext.y() * ext.z();
  const double per_cell = std::max(1.0, static_cast<double>(k) / 2.0);
  return std::max(1e-6, std::cbrt(volume * per_cell / static_cast<double>(n)));
}

}  // namespace

GaussianCloud estimate_covariances(std::span<const Vec3> points, int k,
                                   double epsilon_plane) {
  if (k < 4) throw std::invalid_argument("estimate_covariances: k must be >= 4");
  if (points.size() < static_cast<std::size_t>(k) + 1) {
    throw std::invalid_argument("estimate_covariances: need at least k+1 points");
  }

  GaussianCloud out;
  out.bounds = compute_bounds(points);
  out.mu.assign(points.begin(), points.end());
  out.sigma.resize(points.size());

  const PointBucketGrid grid(points, knn_cell_size(out.bounds, points.size(), k));

#pragma omp parallel
  {
    std::vector<PointBucketGrid::Neighbor> nn;
    std::vector<Vec3> nbr;
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(points.size()); ++i) {
      grid.k_nearest(points[static_cast<std::size_t>(i)], k + 1, nn);
      nbr.clear();
      for (const auto& c : nn) {
        if (c.index == i) continue;  // the point itself
        nbr.push_back(points[static_cast<std::size_t>(c.index)]);
        if (static_cast<int>(nbr.size()) == k) break;
      }

      // Canonical accumulation order, so shuffled inputs give identical sums.
      std::sort(nbr.begin(), nbr.end(), [](const Vec3& a, const Vec3& b) {
        if (a.x() != b.x()) return a.x() < b.x();
        if (a.y() != b.y()) return a.y() < b.y();
        return a.z() < b.z();
      });

      Vec3 mean = Vec3::Zero();
      for (const Vec3& p : nbr) mean += p;
      mean /= static_cast<double>(nbr.size());
      Mat3 cov = Mat3::Zero();
      for (const Vec3& p : nbr) {
        const Vec3 d = p - mean;
        cov += d * d.transpose();
      }
      cov /= static_cast<double>(nbr.size());

      // Plane model: eigenvalues -> lambda_max * (epsilon, 1, 1).
      Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
      const Mat3 v = eig.eigenvectors();  // ascending eigenvalues
      const double lmax = std::max(eig.eigenvalues()[2], 1e-12);
      const Vec3 reg(epsilon_plane * lmax, lmax, lmax);
      out.sigma[static_cast<std::size_t>(i)] = v * reg.asDiagonal() * v.transpose();
    }
  }
  return out;
}

namespace {

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& c) const {
    std::uint64_t h = static_cast<std::uint64_t>(c.x) * 73856093ull;
    h ^= static_cast<std::uint64_t>(c.y) * 19349663ull;
    h ^= static_cast<std::uint64_t>(c.z) * 83492791ull;
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

std::vector<Vec3> voxel_downsample(std::span<const Vec3> points, double leaf) {
  if (!(leaf > 0.0)) throw std::invalid_argument("voxel_downsample: leaf must be positive");
  std::unordered_map<CellKey, std::pair<Vec3, int>, CellKeyHash> cells;
  cells.reserve(points.size());
  std::vector<CellKey> insertion_order;
  insertion_order.reserve(points.size());
  for (const Vec3& p : points) {
    const CellKey key{static_cast<std::int64_t>(std::floor(p.x() / leaf)),
                      static_cast<std::int64_t>(std::floor(p.y() / leaf)),
                      static_cast<std::int64_t>(std::floor(p.z() / leaf))};
    auto [it, fresh] = cells.try_emplace(key, Vec3::Zero(), 0);
    if (fresh) insertion_order.push_back(key);
    it->second.first += p;
    it->second.second += 1;
  }
  std::vector<Vec3> out;
  out.reserve(insertion_order.size());
  for (const CellKey& key : insertion_order) {
    const auto& [sum, n] = cells.at(key);
    out.push_back(sum / static_cast<double>(n));
  }
  return out;
}

std::vector<Vec3> downsample_to(std::span<const Vec3> points,
                                std::size_t max_points, double initial_leaf) {
  if (points.size() <= max_points) return {points.begin(), points.end()};
  double leaf = initial_leaf;
  std::vector<Vec3> out = voxel_downsample(points, leaf);
  while (out.size() > max_points) {
    leaf *= 2.0;
    out = voxel_downsample(points, leaf);
  }
  return out;
}

}  // namespace steinmcl
