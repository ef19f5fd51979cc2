#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace steinmcl {

// Reductions over particle arrays with a combination order that depends only
// on the element count, never on the thread count: partials are computed per
// fixed-size chunk and combined in chunk order. This is what makes whole runs
// replay bit-identically under any OMP_NUM_THREADS.
inline constexpr std::size_t k_reduce_chunk = 4096;

template <class F>
double chunked_sum(std::size_t n, F&& value_at) {
  if (n == 0) return 0.0;
  const std::size_t n_chunks = (n + k_reduce_chunk - 1) / k_reduce_chunk;
  std::vector<double> partial(n_chunks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(n_chunks); ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * k_reduce_chunk;
    const std::size_t end = begin + k_reduce_chunk < n ? begin + k_reduce_chunk : n;
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) acc += value_at(i);
    partial[static_cast<std::size_t>(c)] = acc;
  }
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

struct ArgMax {
  double value = -std::numeric_limits<double>::infinity();
  std::int64_t index = -1;
};

// Argmax with ties broken toward the lowest index.
template <class F>
ArgMax chunked_argmax(std::size_t n, F&& value_at) {
  ArgMax out;
  if (n == 0) return out;
  const std::size_t n_chunks = (n + k_reduce_chunk - 1) / k_reduce_chunk;
  std::vector<ArgMax> partial(n_chunks);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(n_chunks); ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * k_reduce_chunk;
    const std::size_t end = begin + k_reduce_chunk < n ? begin + k_reduce_chunk : n;
    ArgMax best;
    for (std::size_t i = begin; i < end; ++i) {
      const double v = value_at(i);
      if (v > best.value) {
        best.value = v;
        best.index = static_cast<std::int64_t>(i);
      }
    }
    partial[static_cast<std::size_t>(c)] = best;
  }
  for (const ArgMax& p : partial) {
    if (p.value > out.value) out = p;
  }
  return out;
}

template <class F>
double chunked_max(std::size_t n, F&& value_at) {
  return chunked_argmax(n, value_at).value;
}

}  // namespace steinmcl
