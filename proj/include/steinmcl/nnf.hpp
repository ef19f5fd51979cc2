#pragma once

#include <cstdint>
#include <vector>

#include "steinmcl/gaussian_cloud.hpp"

namespace steinmcl {

// Dense voxel field over the (padded) map bounds. Each cell stores the index
// of the map point nearest to the cell center, or k_empty when no point lies
// within max_query_dist. Gives O(1) correspondence lookup per scan point.
struct NearestNeighborField {
  static constexpr std::int32_t k_empty = -1;

  Vec3 origin = Vec3::Zero();
  double resolution = 0.1;
  double max_query_dist = 1.0;
  Eigen::Vector3i dims = Eigen::Vector3i::Zero();
  std::vector<std::int32_t> cells;

  // Index of the nearest map point for the cell containing p; k_empty for
  // out-of-bounds queries and for cells beyond max_query_dist of the map.
  std::int32_t lookup_nearest(const Vec3& p) const {
    const double inv = 1.0 / resolution;
    const int x = static_cast<int>(std::floor((p.x() - origin.x()) * inv));
    const int y = static_cast<int>(std::floor((p.y() - origin.y()) * inv));
    const int z = static_cast<int>(std::floor((p.z() - origin.z()) * inv));
    if (static_cast<unsigned>(x) >= static_cast<unsigned>(dims.x()) ||
        static_cast<unsigned>(y) >= static_cast<unsigned>(dims.y()) ||
        static_cast<unsigned>(z) >= static_cast<unsigned>(dims.z())) {
      return k_empty;
    }
    return cells[(static_cast<std::size_t>(z) * dims.y() + y) * dims.x() + x];
  }

  Vec3 cell_center(int x, int y, int z) const {
    return origin + resolution * (Vec3(x, y, z) + Vec3::Constant(0.5));
  }

  std::size_t cell_count() const { return cells.size(); }
};

// Builds the field with exact nearest assignments. A multi-source BFS over the
// voxel grid bounds which cells can possibly be within max_query_dist; those
// get an exact ring-search query against the point bucket grid, the rest stay
// empty. Throws if the cell count would exceed max_cells.
NearestNeighborField build_nnf(const GaussianCloud& map, double resolution,
                               double padding, double max_query_dist = 1.0,
                               std::size_t max_cells = std::size_t(1) << 30);

}  // namespace steinmcl
