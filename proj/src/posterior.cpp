#include "steinmcl/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "steinmcl/gicp.hpp"
#include "steinmcl/reduce.hpp"

namespace steinmcl {

void normalize_log_post(std::span<double> log_post, double floor) {
  const std::size_t n = log_post.size();
  if (n == 0) return;
  const double m = chunked_max(n, [&](std::size_t i) { return log_post[i]; });
  const double sum = chunked_sum(n, [&](std::size_t i) { return std::exp(log_post[i] - m); });
  const double lse = m + std::log(sum);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    double& v = log_post[static_cast<std::size_t>(i)];
    v = std::max(v - lse, floor);
  }
}

bool bayes_update(std::span<double> log_post, std::span<const double> log_lik,
                  std::span<const std::int32_t> n_matched, double beta,
                  double floor) {
  if (!(beta >= 0.0)) throw std::invalid_argument("bayes_update: beta must be >= 0");
  const std::size_t n = log_post.size();
  if (log_lik.size() != n || n_matched.size() != n) {
    throw std::invalid_argument("bayes_update: size mismatch");
  }
  if (n == 0) return false;

  const double matched = chunked_sum(n, [&](std::size_t i) {
    return log_lik[i] > k_unmatched_log_lik ? 1.0 : 0.0;
  });
  if (matched == 0.0) {
    // Observation carried no information for any particle; keep the belief
    // alive by resetting to uniform.
    const double uniform = -std::log(static_cast<double>(n));
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
      log_post[static_cast<std::size_t>(i)] = uniform;
    }
    return true;
  }

#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    const double denom = std::max(n_matched[k], 1);
    log_post[k] += beta * log_lik[k] / denom;
  }
  normalize_log_post(log_post, floor);
  return false;
}

void smooth(std::span<double> log_post, const NeighborGraph& graph, int iters,
            double floor) {
  if (iters < 0) throw std::invalid_argument("smooth: iters must be >= 0");
  const std::size_t n = log_post.size();
  if (n == 0 || iters == 0) return;
  if (graph.size() != n) throw std::invalid_argument("smooth: graph size mismatch");

  // Probability domain: values stay within [exp(floor), 1], comfortably inside
  // double range, and each round is a plain convex combination.
  std::vector<double> p(n), q(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    p[static_cast<std::size_t>(i)] = std::exp(log_post[static_cast<std::size_t>(i)]);
  }

  for (int round = 0; round < iters; ++round) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
      const std::size_t k = static_cast<std::size_t>(i);
      const auto idx = graph.neighbors_of(k);
      const auto kv = graph.kernels_of(k);
      double num = 0.0, den = 0.0;
      for (std::size_t s = 0; s < idx.size(); ++s) {
        const double w = kv[s];
        num += w * p[static_cast<std::size_t>(idx[s])];
        den += w;
      }
      q[k] = num / den;  // den >= self kernel == 1
    }
    p.swap(q);
  }

#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    log_post[static_cast<std::size_t>(i)] = std::log(p[static_cast<std::size_t>(i)]);
  }
  normalize_log_post(log_post, floor);
}

Representative representative(std::span<const double> log_post,
                              std::span<const Pose> poses) {
  if (log_post.empty() || log_post.size() != poses.size()) {
    throw std::invalid_argument("representative: empty or mismatched particle set");
  }
  const ArgMax best =
      chunked_argmax(log_post.size(), [&](std::size_t i) { return log_post[i]; });
  return {best.index, poses[static_cast<std::size_t>(best.index)], best.value};
}

}  // namespace steinmcl
