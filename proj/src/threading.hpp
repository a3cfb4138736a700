#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace tpp {

// hardware concurrency clamped to [1, 16]
int default_thread_count();

// Runs fn(i) for every i in [0, n) split into contiguous chunks, one worker
// per chunk.  threads <= 0 picks default_thread_count().  Callers must make
// fn(i) write only to slot i of preallocated storage; results then cannot
// depend on the thread count.  The first exception thrown by any worker is
// rethrown.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn);

// Fixed pairwise tree reduction.  Summation order depends only on n, so
// totals are bit-identical no matter how the inputs were produced.
double pairwise_sum(const double* v, std::size_t n);
double pairwise_sum(const std::vector<double>& v);

}  // namespace tpp
