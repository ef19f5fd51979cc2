#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "steinmcl/filter.hpp"

namespace steinmcl {

struct StageBench {
  double predict_ms = 0.0;
  double neighbor_ms = 0.0;
  double likelihood_ms = 0.0;
  double svgd_ms = 0.0;
  double posterior_ms = 0.0;
};

struct BenchRow {
  std::size_t n_particles = 0;
  StageBench parallel;
  StageBench serial;  // reference kernels, only when compare_serial
};

struct BenchOptions {
  std::vector<std::size_t> particle_counts = {10000, 100000, 1000000};
  int frames = 3;
  int scan_points = 16;     // scan size for the likelihood stage
  bool compare_serial = false;
  std::uint64_t seed = 1;
};

// Per-stage per-frame timings on a synthetic setup with constant particle
// density (the cube grows with the count, keeping bucket occupancy and
// per-particle work comparable across sizes). Mean over `frames` after one
// warmup frame.
std::vector<BenchRow> run_bench(const BenchOptions& opts, std::ostream& log);

void print_bench_table(const std::vector<BenchRow>& rows, bool compare_serial,
                       std::ostream& out);

}  // namespace steinmcl
