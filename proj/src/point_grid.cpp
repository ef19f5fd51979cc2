#include "steinmcl/point_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace steinmcl {

PointBucketGrid::PointBucketGrid(std::span<const Vec3> points, double cell_size)
    : points_(points.begin(), points.end()), cell_size_(cell_size) {
  if (points_.empty()) throw std::invalid_argument("PointBucketGrid: empty point set");
  if (!(cell_size > 0.0)) throw std::invalid_argument("PointBucketGrid: cell_size must be positive");

  Vec3 lo = points_[0], hi = points_[0];
  for (const Vec3& p : points_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  origin_ = lo;
  for (int a = 0; a < 3; ++a) {
    dims_[a] = static_cast<int>(std::floor((hi[a] - lo[a]) / cell_size_)) + 1;
  }

  const std::size_t n_cells =
      static_cast<std::size_t>(dims_.x()) * dims_.y() * dims_.z();
  std::vector<std::int32_t> counts(n_cells + 1, 0);
  std::vector<std::int32_t> cell(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    cell[i] = cell_index(cell_of(points_[i]));
    ++counts[static_cast<std::size_t>(cell[i]) + 1];
  }
  offsets_.assign(n_cells + 1, 0);
  for (std::size_t c = 0; c < n_cells; ++c) offsets_[c + 1] = offsets_[c] + counts[c + 1];
  order_.resize(points_.size());
  std::vector<std::int32_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    order_[static_cast<std::size_t>(cursor[cell[i]]++)] = static_cast<std::int32_t>(i);
  }
}

Eigen::Vector3i PointBucketGrid::cell_of(const Vec3& p) const {
  Eigen::Vector3i c;
  for (int a = 0; a < 3; ++a) {
    int v = static_cast<int>(std::floor((p[a] - origin_[a]) / cell_size_));
    c[a] = std::clamp(v, 0, dims_[a] - 1);
  }
  return c;
}

void PointBucketGrid::k_nearest(const Vec3& query, int k,
                                std::vector<Neighbor>& out) const {
  out.clear();
  if (k <= 0) return;
  const Eigen::Vector3i c0 = cell_of(query);
  const int r_max = std::max({dims_.x(), dims_.y(), dims_.z()});

  double worst = std::numeric_limits<double>::infinity();
  auto offer = [&](std::int32_t idx) {
    const double d2 = (points_[static_cast<std::size_t>(idx)] - query).squaredNorm();
    if (static_cast<int>(out.size()) < k) {
      out.push_back({d2, idx});
      if (static_cast<int>(out.size()) == k) {
        std::sort(out.begin(), out.end(),
                  [](const Neighbor& a, const Neighbor& b) { return a.dist2 < b.dist2; });
        worst = out.back().dist2;
      }
      return;
    }
    if (d2 >= worst) return;
    // Insertion into the sorted candidate list; k stays small.
    out.back() = {d2, idx};
    for (std::size_t j = out.size() - 1; j > 0 && out[j].dist2 < out[j - 1].dist2; --j) {
      std::swap(out[j], out[j - 1]);
    }
    worst = out.back().dist2;
  };

  for (int r = 0; r <= r_max; ++r) {
    // Cells at Chebyshev radius r are at least (r-1)*cell away from anywhere
    // inside the query's own cell.
    if (static_cast<int>(out.size()) >= k) {
      const double lb = (r - 1) * cell_size_;
      if (lb > 0.0 && lb * lb > worst) break;
    }
    const int xlo = std::max(c0.x() - r, 0), xhi = std::min(c0.x() + r, dims_.x() - 1);
    const int ylo = std::max(c0.y() - r, 0), yhi = std::min(c0.y() + r, dims_.y() - 1);
    const int zlo = std::max(c0.z() - r, 0), zhi = std::min(c0.z() + r, dims_.z() - 1);
    for (int z = zlo; z <= zhi; ++z) {
      for (int y = ylo; y <= yhi; ++y) {
        for (int x = xlo; x <= xhi; ++x) {
          const int cheb = std::max({std::abs(x - c0.x()), std::abs(y - c0.y()),
                                     std::abs(z - c0.z())});
          if (cheb != r) continue;  // only the shell of this ring
          const std::int32_t ci = cell_index({x, y, z});
          for (std::int32_t j = offsets_[ci]; j < offsets_[ci + 1]; ++j) {
            offer(order_[static_cast<std::size_t>(j)]);
          }
        }
      }
    }
  }
  if (static_cast<int>(out.size()) < k) {
    std::sort(out.begin(), out.end(),
              [](const Neighbor& a, const Neighbor& b) { return a.dist2 < b.dist2; });
  }
}

std::int32_t PointBucketGrid::nearest_within(const Vec3& query, double max_dist) const {
  const Eigen::Vector3i c0 = cell_of(query);
  const int r_cap = static_cast<int>(std::ceil(max_dist / cell_size_)) + 1;

  double best2 = max_dist * max_dist;
  std::int32_t best = -1;
  for (int r = 0; r <= r_cap; ++r) {
    const double lb = (r - 1) * cell_size_;
    if (lb > 0.0 && lb * lb > best2) break;
    const int xlo = std::max(c0.x() - r, 0), xhi = std::min(c0.x() + r, dims_.x() - 1);
    const int ylo = std::max(c0.y() - r, 0), yhi = std::min(c0.y() + r, dims_.y() - 1);
    const int zlo = std::max(c0.z() - r, 0), zhi = std::min(c0.z() + r, dims_.z() - 1);
    for (int z = zlo; z <= zhi; ++z) {
      for (int y = ylo; y <= yhi; ++y) {
        for (int x = xlo; x <= xhi; ++x) {
          const int cheb = std::max({std::abs(x - c0.x()), std::abs(y - c0.y()),
                                     std::abs(z - c0.z())});
          if (cheb != r) continue;
          const std::int32_t ci = cell_index({x, y, z});
          for (std::int32_t j = offsets_[ci]; j < offsets_[ci + 1]; ++j) {
            const std::int32_t idx = order_[static_cast<std::size_t>(j)];
            const double d2 = (points_[static_cast<std::size_t>(idx)] - query).squaredNorm();
            if (d2 < best2 || (d2 == best2 && best >= 0 && idx < best)) {
              best2 = d2;
              best = idx;
            }
          }
        }
      }
    }
  }
  return best;
}

}  // namespace steinmcl
