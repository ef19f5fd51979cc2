#include "steinmcl/nnf.hpp"

#include <cmath>
#include <stdexcept>

#include "steinmcl/point_grid.hpp"

namespace steinmcl {

NearestNeighborField build_nnf(const GaussianCloud& map, double resolution,
                               double padding, double max_query_dist,
                               std::size_t max_cells) {
  if (map.empty()) throw std::invalid_argument("build_nnf: empty map");
  if (!(resolution > 0.0)) throw std::invalid_argument("build_nnf: resolution must be positive");
  if (padding < 0.0) throw std::invalid_argument("build_nnf: padding must be >= 0");

  NearestNeighborField nnf;
  nnf.resolution = resolution;
  nnf.max_query_dist = max_query_dist;
  const Aabb padded = map.bounds.padded(padding);
  nnf.origin = padded.min;
  std::size_t n_cells = 1;
  for (int a = 0; a < 3; ++a) {
    nnf.dims[a] = static_cast<int>(std::floor(padded.extent()[a] / resolution)) + 1;
    n_cells *= static_cast<std::size_t>(nnf.dims[a]);
    if (n_cells > max_cells) {
      throw std::runtime_error("build_nnf: cell count exceeds the memory budget");
    }
  }
  nnf.cells.assign(n_cells, NearestNeighborField::k_empty);

  const int nx = nnf.dims.x(), ny = nnf.dims.y(), nz = nnf.dims.z();
  auto flat = [&](int x, int y, int z) {
    return (static_cast<std::size_t>(z) * ny + y) * nx + x;
  };

  // Multi-source BFS dilation from point-occupied cells. A cell whose center
  // is within max_query_dist of a point is at most hop_cap Chebyshev hops from
  // that point's cell, so anything the BFS never reaches stays empty.
  const int hop_cap = static_cast<int>(std::ceil(max_query_dist / resolution)) + 2;
  std::vector<std::int16_t> hops(n_cells, -1);
  std::vector<std::int32_t> frontier;
  for (const Vec3& p : map.mu) {
    const Vec3 rel = (p - nnf.origin) / resolution;
    const int x = std::clamp(static_cast<int>(std::floor(rel.x())), 0, nx - 1);
    const int y = std::clamp(static_cast<int>(std::floor(rel.y())), 0, ny - 1);
    const int z = std::clamp(static_cast<int>(std::floor(rel.z())), 0, nz - 1);
    const std::size_t c = flat(x, y, z);
    if (hops[c] < 0) {
      hops[c] = 0;
      frontier.push_back(static_cast<std::int32_t>(c));
    }
  }
  std::vector<std::int32_t> next;
  for (int hop = 1; hop <= hop_cap && !frontier.empty(); ++hop) {
    next.clear();
    for (std::int32_t ci : frontier) {
      const int x = ci % nx;
      const int y = (ci / nx) % ny;
      const int z = ci / (nx * ny);
      for (int dz = -1; dz <= 1; ++dz) {
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int xx = x + dx, yy = y + dy, zz = z + dz;
            if (static_cast<unsigned>(xx) >= static_cast<unsigned>(nx) ||
                static_cast<unsigned>(yy) >= static_cast<unsigned>(ny) ||
                static_cast<unsigned>(zz) >= static_cast<unsigned>(nz)) {
              continue;
            }
            const std::size_t c = flat(xx, yy, zz);
            if (hops[c] < 0) {
              hops[c] = static_cast<std::int16_t>(hop);
              next.push_back(static_cast<std::int32_t>(c));
            }
          }
        }
      }
    }
    frontier.swap(next);
  }

  const PointBucketGrid grid(map.mu, resolution);

#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t z = 0; z < nz; ++z) {
    for (int y = 0; y < ny; ++y) {
      for (int x = 0; x < nx; ++x) {
        const std::size_t c = flat(x, static_cast<int>(y), static_cast<int>(z));
        if (hops[c] < 0) continue;
        const Vec3 center = nnf.cell_center(x, static_cast<int>(y), static_cast<int>(z));
        nnf.cells[c] = grid.nearest_within(center, max_query_dist);
      }
    }
  }
  return nnf;
}

}  // namespace steinmcl
