#pragma once

#include <cstdint>
#include <span>

#include "steinmcl/neighbor_graph.hpp"
#include "steinmcl/se3.hpp"

namespace steinmcl {

// Per-particle log posteriors live in natural log, normalized so that
// log-sum-exp over all particles is 0. A floor keeps every particle revivable
// (there is no resampling to bring dead particles back).
inline constexpr double k_default_log_post_floor = -80.0;

void normalize_log_post(std::span<double> log_post,
                        double floor = k_default_log_post_floor);

// Bayes update: log_post += beta * log_lik / max(n_matched, 1), then
// renormalize. The per-matched-point average plus the temperature beta tempers
// the raw GICP sums so the posterior does not collapse to a single particle
// every frame. Returns true if the observation was rejected (every particle at
// the unmatched sentinel), in which case the posterior resets to uniform.
bool bayes_update(std::span<double> log_post, std::span<const double> log_lik,
                  std::span<const std::int32_t> n_matched, double beta,
                  double floor = k_default_log_post_floor);

// `iters` Jacobi rounds of kernel-weighted averaging over the neighbor graph
// (cached kernel values), renormalized once after all rounds.
void smooth(std::span<double> log_post, const NeighborGraph& graph, int iters,
            double floor = k_default_log_post_floor);

struct Representative {
  std::int64_t index = -1;
  Pose pose;
  double log_post = 0.0;
};

// Particle with the highest posterior; ties break to the lowest index.
Representative representative(std::span<const double> log_post,
                              std::span<const Pose> poses);

}  // namespace steinmcl
