#pragma once

#include <cmath>
#include <cstdint>

#include "steinmcl/se3.hpp"

namespace steinmcl {

// All randomness in the project flows through this generator. It is cheap to
// seed, so the filter derives an independent stream per (stage, frame,
// particle) tuple and every kernel can draw in parallel without shared state.
// Normal draws use Box-Muller on top, keeping results identical across
// platforms and thread counts.
struct SplitMix64 {
  std::uint64_t state = 0;

  SplitMix64() = default;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  using result_type = std::uint64_t;
  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return ~std::uint64_t(0); }

  std::uint64_t operator()() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
};

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  SplitMix64 g(a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2)));
  return g();
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix_seed(mix_seed(a, b), c);
}

// Uniform double in [0, 1).
inline double uniform01(SplitMix64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_range(SplitMix64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Two independent standard normals from one Box-Muller transform.
inline void normal_pair(SplitMix64& rng, double& z0, double& z1) {
  const double u1 = 1.0 - uniform01(rng);  // (0, 1]
  const double u2 = uniform01(rng);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  z0 = r * std::cos(a);
  z1 = r * std::sin(a);
}

inline double normal01(SplitMix64& rng) {
  double z0, z1;
  normal_pair(rng, z0, z1);
  return z0;
}

inline Vec6 normal6(SplitMix64& rng) {
  Vec6 z;
  normal_pair(rng, z[0], z[1]);
  normal_pair(rng, z[2], z[3]);
  normal_pair(rng, z[4], z[5]);
  return z;
}

// Uniform rotation on SO3 (Shoemake's subgroup method).
inline Mat3 random_rotation(SplitMix64& rng) {
  const double u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  const double u3 = uniform01(rng);
  const double a = std::sqrt(1.0 - u1);
  const double b = std::sqrt(u1);
  const Eigen::Quaterniond q(b * std::cos(2.0 * M_PI * u3),
                             a * std::sin(2.0 * M_PI * u2),
                             a * std::cos(2.0 * M_PI * u2),
                             b * std::sin(2.0 * M_PI * u3));
  return q.toRotationMatrix();
}

inline Mat3 random_yaw(SplitMix64& rng) {
  const double yaw = uniform_range(rng, -M_PI, M_PI);
  return Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
}

}  // namespace steinmcl
