#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace simplexscan {

// Worker count used when a caller does not pick one: the SIMPLEXSCAN_WORKERS
// environment variable if set, otherwise the OpenMP default.
inline int default_workers() {
  if (const char* env = std::getenv("SIMPLEXSCAN_WORKERS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Fixed Monte Carlo block size.  Sums are accumulated per block in sample
// order and the blocks are combined in index order, so the floating-point
// result is a function of the sample values alone — identical for the serial
// path and for any OpenMP worker count.
inline constexpr std::uint64_t kMcBlock = 1024;

struct Accumulated {
  std::vector<double> sum;    // per output column
  std::vector<double> sumsq;  // per output column
  std::uint64_t n = 0;

  double mean(std::size_t i) const { return n ? sum[i] / double(n) : 0.0; }
  // Standard error of the mean for column i.
  double std_err(std::size_t i) const {
    if (n < 2) return 0.0;
    const double m = mean(i);
    double var = (sumsq[i] - double(n) * m * m) / double(n - 1);
    if (var < 0.0) var = 0.0;
    return std::sqrt(var / double(n));
  }
};

namespace detail {

template <class F>
inline void accumulate_block(std::uint64_t lo, std::uint64_t hi,
                             std::size_t width, F& fn, double* sum,
                             double* sumsq, double* scratch) {
  for (std::uint64_t i = lo; i < hi; ++i) {
    fn(i, scratch);
    for (std::size_t c = 0; c < width; ++c) {
      sum[c] += scratch[c];
      sumsq[c] += scratch[c] * scratch[c];
    }
  }
}

}  // namespace detail

// Serial reference path, kept as the comparison baseline for the OpenMP
// kernels; uses the identical blocked summation tree.
template <class F>
Accumulated mc_accumulate_serial(std::uint64_t n, std::size_t width, F&& fn) {
  const std::uint64_t nblocks = (n + kMcBlock - 1) / kMcBlock;
  std::vector<double> bsum(nblocks * width, 0.0), bsq(nblocks * width, 0.0);
  std::vector<double> scratch(width);
  for (std::uint64_t b = 0; b < nblocks; ++b) {
    const std::uint64_t lo = b * kMcBlock;
    const std::uint64_t hi = std::min(n, lo + kMcBlock);
    detail::accumulate_block(lo, hi, width, fn, &bsum[b * width],
                             &bsq[b * width], scratch.data());
  }
  Accumulated acc;
  acc.n = n;
  acc.sum.assign(width, 0.0);
  acc.sumsq.assign(width, 0.0);
  for (std::uint64_t b = 0; b < nblocks; ++b)
    for (std::size_t c = 0; c < width; ++c) {
      acc.sum[c] += bsum[b * width + c];
      acc.sumsq[c] += bsq[b * width + c];
    }
  return acc;
}

// OpenMP path: blocks are distributed across workers, but each block's sums
// are private and the final combine runs in block order, so the result is
// bit-identical to mc_accumulate_serial.
//
// fn(sample_index, out) must fill out[0..width) and be safe to call
// concurrently for distinct sample indices (per-sample substreams).
template <class F>
Accumulated mc_accumulate(std::uint64_t n, std::size_t width, F&& fn,
                          int workers) {
  if (workers <= 1) return mc_accumulate_serial(n, width, fn);
  const std::uint64_t nblocks = (n + kMcBlock - 1) / kMcBlock;
  std::vector<double> bsum(nblocks * width, 0.0), bsq(nblocks * width, 0.0);
#ifdef _OPENMP
#pragma omp parallel num_threads(workers)
  {
    std::vector<double> scratch(width);
#pragma omp for schedule(dynamic)
    for (std::int64_t b = 0; b < std::int64_t(nblocks); ++b) {
      const std::uint64_t lo = std::uint64_t(b) * kMcBlock;
      const std::uint64_t hi = std::min(n, lo + kMcBlock);
      detail::accumulate_block(lo, hi, width, fn, &bsum[b * width],
                               &bsq[b * width], scratch.data());
    }
  }
#else
  {
    std::vector<double> scratch(width);
    for (std::uint64_t b = 0; b < nblocks; ++b) {
      const std::uint64_t lo = b * kMcBlock;
      const std::uint64_t hi = std::min(n, lo + kMcBlock);
      detail::accumulate_block(lo, hi, width, fn, &bsum[b * width],
                               &bsq[b * width], scratch.data());
    }
  }
#endif
  Accumulated acc;
  acc.n = n;
  acc.sum.assign(width, 0.0);
  acc.sumsq.assign(width, 0.0);
  for (std::uint64_t b = 0; b < nblocks; ++b)
    for (std::size_t c = 0; c < width; ++c) {
      acc.sum[c] += bsum[b * width + c];
      acc.sumsq[c] += bsq[b * width + c];
    }
  return acc;
}

}  // namespace simplexscan
