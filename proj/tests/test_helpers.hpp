#pragma once

#include <cmath>

#include "steinmcl/rng.hpp"
#include "steinmcl/se3.hpp"

namespace steinmcl::test {

inline Tangent random_tangent(SplitMix64& rng, double max_angle, double max_trans) {
  Vec3 axis(normal01(rng), normal01(rng), normal01(rng));
  axis.normalize();
  Tangent xi;
  xi.head<3>() = axis * uniform_range(rng, 0.0, max_angle);
  for (int a = 0; a < 3; ++a) xi[3 + a] = uniform_range(rng, -max_trans, max_trans);
  return xi;
}

inline Pose random_pose(SplitMix64& rng, double max_angle = M_PI - 0.2,
                        double max_trans = 5.0) {
  return se3_exp(random_tangent(rng, max_angle, max_trans));
}

}  // namespace steinmcl::test
