#include <doctest.h>

#include <cmath>

#include "steinmcl/gicp.hpp"
#include "steinmcl/posterior.hpp"
#include "steinmcl/rng.hpp"
#include "test_helpers.hpp"

using namespace steinmcl;

namespace {

std::vector<double> uniform_post(std::size_t n) {
  return std::vector<double>(n, -std::log(static_cast<double>(n)));
}

double logsumexp(std::span<const double> v) {
  double m = v[0];
  for (const double x : v) m = std::max(m, x);
  double s = 0.0;
  for (const double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

NeighborGraph full_graph(std::size_t n, float kval) {
  NeighborGraph g;
  g.init_self(n, static_cast<int>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) g.offer(i, static_cast<std::int32_t>(j), kval);
    }
  }
  return g;
}

}  // namespace

TEST_CASE("bayes update keeps a uniform posterior uniform under equal likelihoods") {
  std::vector<double> post = uniform_post(64);
  const std::vector<double> lik(64, -12.5);
  const std::vector<std::int32_t> matched(64, 40);
  const bool rejected = bayes_update(post, lik, matched, 2.0);
  CHECK(!rejected);
  for (const double v : post) CHECK(v == doctest::Approx(-std::log(64.0)).epsilon(1e-12));
  CHECK(std::abs(logsumexp(post)) < 1e-9);
}

TEST_CASE("two-particle posterior ratio follows the tempered likelihood gap") {
  std::vector<double> post = uniform_post(2);
  const double delta = 1.7;
  const std::vector<double> lik = {0.0, -delta};
  const std::vector<std::int32_t> matched = {1, 1};
  bayes_update(post, lik, matched, 1.0);
  CHECK(post[0] - post[1] == doctest::Approx(delta).epsilon(1e-12));
}

TEST_CASE("beta zero leaves the posterior unchanged") {
  std::vector<double> post = {-0.5, -2.0, -1.2};
  normalize_log_post(post);
  const std::vector<double> before = post;
  const std::vector<double> lik = {-5.0, -50.0, -2.0};
  const std::vector<std::int32_t> matched = {3, 3, 3};
  bayes_update(post, lik, matched, 0.0);
  for (std::size_t i = 0; i < post.size(); ++i) {
    CHECK(post[i] == doctest::Approx(before[i]).epsilon(1e-12));
  }
}

TEST_CASE("an all-sentinel observation is rejected and resets to uniform") {
  std::vector<double> post = {-0.1, -3.0, -2.0, -5.0};
  normalize_log_post(post);
  const std::vector<double> lik(4, k_unmatched_log_lik);
  const std::vector<std::int32_t> matched(4, 0);
  const bool rejected = bayes_update(post, lik, matched, 2.0);
  CHECK(rejected);
  for (const double v : post) CHECK(v == doctest::Approx(-std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("per-point averaging divides by the match count") {
  std::vector<double> post = uniform_post(2);
  // Same total cost, different match counts: the averaged costs differ.
  const std::vector<double> lik = {-10.0, -10.0};
  const std::vector<std::int32_t> matched = {10, 5};
  bayes_update(post, lik, matched, 1.0);
  CHECK(post[0] - post[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("smoothing with self-only lists is the identity") {
  NeighborGraph g;
  g.init_self(5, 4);
  std::vector<double> post = {-0.2, -1.0, -2.5, -3.0, -4.0};
  normalize_log_post(post);
  const std::vector<double> before = post;
  smooth(post, g, 7);
  for (std::size_t i = 0; i < post.size(); ++i) {
    CHECK(post[i] == doctest::Approx(before[i]).epsilon(1e-12));
  }
}

TEST_CASE("a uniform posterior is a fixed point of smoothing") {
  const std::size_t n = 16;
  const NeighborGraph g = full_graph(n, 0.37f);
  std::vector<double> post = uniform_post(n);
  smooth(post, g, 10);
  for (const double v : post) CHECK(v == doctest::Approx(-std::log(double(n))).epsilon(1e-12));
}

TEST_CASE("three coincident particles average to one third each") {
  const NeighborGraph g = full_graph(3, 1.0f);
  // Probabilities (1, 0, 0); zeros live at the floor.
  std::vector<double> post = {0.0, k_default_log_post_floor, k_default_log_post_floor};
  smooth(post, g, 1);
  for (const double v : post) {
    CHECK(std::exp(v) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
}

TEST_CASE("one smoothing round is the expected convex combination") {
  SplitMix64 rng(9);
  const std::size_t n = 40;
  NeighborGraph g;
  g.init_self(n, 6);
  for (std::size_t i = 0; i < n; ++i) {
    for (int s = 0; s < 5; ++s) {
      g.offer(i, static_cast<std::int32_t>(rng() % n),
              static_cast<float>(uniform01(rng)));
    }
  }
  std::vector<double> post(n);
  for (auto& v : post) v = uniform_range(rng, -6.0, 0.0);
  normalize_log_post(post);

  // Oracle: one Jacobi round in probability space.
  std::vector<double> p(n), expect(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = std::exp(post[i]);
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < n; ++i) {
    const auto idx = g.neighbors_of(i);
    const auto kv = g.kernels_of(i);
    double num = 0.0, den = 0.0;
    for (std::size_t s = 0; s < idx.size(); ++s) {
      num += kv[s] * p[static_cast<std::size_t>(idx[s])];
      den += kv[s];
    }
    expect[i] = num / den;
    lo = std::min(lo, expect[i]);
    hi = std::max(hi, expect[i]);
  }
  // Convexity: each round stays inside the previous value range.
  double plo = 1e300, phi = -1e300;
  for (const double v : p) {
    plo = std::min(plo, v);
    phi = std::max(phi, v);
  }
  CHECK(lo >= plo - 1e-9);
  CHECK(hi <= phi + 1e-9);

  std::vector<double> got = post;
  smooth(got, g, 1);
  // smooth() renormalizes afterwards; compare normalized oracle.
  std::vector<double> expect_log(n);
  for (std::size_t i = 0; i < n; ++i) expect_log[i] = std::log(expect[i]);
  const double lse = logsumexp(expect_log);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(got[i] == doctest::Approx(expect_log[i] - lse).epsilon(1e-12));
  }
}

TEST_CASE("representative picks the argmax with lowest-index ties") {
  std::vector<Pose> poses(6);
  for (int i = 0; i < 6; ++i) poses[static_cast<std::size_t>(i)].t = Vec3(i, 0, 0);

  SUBCASE("single particle") {
    const std::vector<double> post = {0.0};
    const Representative rep =
        representative(std::span<const double>(post.data(), 1),
                       std::span<const Pose>(poses.data(), 1));
    CHECK(rep.index == 0);
  }
  SUBCASE("plain argmax") {
    const std::vector<double> post = {std::log(0.1), std::log(0.7), std::log(0.2)};
    const Representative rep =
        representative(std::span<const double>(post.data(), 3),
                       std::span<const Pose>(poses.data(), 3));
    CHECK(rep.index == 1);
    CHECK(rep.pose.t.x() == doctest::Approx(1.0));
  }
  SUBCASE("exact tie breaks to the lowest index") {
    std::vector<double> post = {-3.0, -1.0, -2.0, -1.0, -1.0, -4.0};
    const Representative rep = representative(post, poses);
    CHECK(rep.index == 1);
  }
}

TEST_CASE("positive likelihood scaling never changes the representative at uniform prior") {
  SplitMix64 rng(21);
  std::vector<Pose> poses(50);
  std::vector<double> lik(50);
  std::vector<std::int32_t> matched(50, 25);
  for (auto& v : lik) v = uniform_range(rng, -30.0, 0.0);
  for (const double scale : {0.3, 1.0, 7.5}) {
    std::vector<double> post = uniform_post(50);
    std::vector<double> scaled = lik;
    for (auto& v : scaled) v *= scale;
    bayes_update(post, scaled, matched, 2.0);
    const Representative rep = representative(post, poses);
    std::vector<double> base = uniform_post(50);
    bayes_update(base, lik, matched, 2.0);
    CHECK(rep.index == representative(base, poses).index);
  }
}

TEST_CASE("normalization holds after every operation") {
  SplitMix64 rng(33);
  const std::size_t n = 500;
  std::vector<double> post(n);
  for (auto& v : post) v = uniform_range(rng, -40.0, 0.0);
  normalize_log_post(post);
  CHECK(std::abs(logsumexp(post)) < 1e-9);

  std::vector<double> lik(n);
  std::vector<std::int32_t> matched(n);
  for (std::size_t i = 0; i < n; ++i) {
    lik[i] = uniform_range(rng, -500.0, 0.0);
    matched[i] = static_cast<std::int32_t>(1 + rng() % 60);
  }
  bayes_update(post, lik, matched, 2.0);
  CHECK(std::abs(logsumexp(post)) < 1e-9);

  const NeighborGraph g = full_graph(32, 0.5f);
  std::vector<double> post32(post.begin(), post.begin() + 32);
  normalize_log_post(post32);
  smooth(post32, g, 10);
  CHECK(std::abs(logsumexp(post32)) < 1e-9);
  for (const double v : post32) CHECK(v >= k_default_log_post_floor);
}
