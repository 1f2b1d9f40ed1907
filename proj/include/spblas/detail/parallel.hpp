#pragma once

#include <algorithm>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <spblas/runtime.hpp>

namespace spblas::detail {

// Runs fn(begin, end) over [0, n) split into blocks of `grain` items. Block
// boundaries depend only on n and grain; the thread count only decides who
// runs a block. Callers must not throw from fn.
template <class F>
void for_each_block(const execution_policy& policy, std::int64_t n, std::int64_t grain, F&& fn) {
  if (n <= 0) return;
  grain = std::max<std::int64_t>(grain, 1);
  const std::int64_t nblocks = (n + grain - 1) / grain;
#ifdef _OPENMP
  if (policy.is_parallel() && nblocks > 1) {
#pragma omp parallel for schedule(static) num_threads(policy.threads)
    for (std::int64_t b = 0; b < nblocks; ++b) {
      fn(b * grain, std::min(n, (b + 1) * grain));
    }
    return;
  }
#endif
  for (std::int64_t b = 0; b < nblocks; ++b) {
    fn(b * grain, std::min(n, (b + 1) * grain));
  }
}

// As for_each_block, with one workspace per participating thread created by
// make(). fn(begin, end, workspace&).
template <class Make, class F>
void for_each_block_with(const execution_policy& policy, std::int64_t n, std::int64_t grain,
                         Make&& make, F&& fn) {
  if (n <= 0) return;
  grain = std::max<std::int64_t>(grain, 1);
  const std::int64_t nblocks = (n + grain - 1) / grain;
#ifdef _OPENMP
  if (policy.is_parallel() && nblocks > 1) {
#pragma omp parallel num_threads(policy.threads)
    {
      auto ws = make();
#pragma omp for schedule(static)
      for (std::int64_t b = 0; b < nblocks; ++b) {
        fn(b * grain, std::min(n, (b + 1) * grain), ws);
      }
    }
    return;
  }
#endif
  auto ws = make();
  for (std::int64_t b = 0; b < nblocks; ++b) {
    fn(b * grain, std::min(n, (b + 1) * grain), ws);
  }
}

// Row loops: each row is independent, so results never depend on the
// partition.
template <class F>
void for_each_row(const execution_policy& policy, std::int64_t n, F&& fn) {
  for_each_block(policy, n, 64, [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) fn(i);
  });
}

inline int block_count_for_threads(const execution_policy& policy) {
  return policy.is_parallel() ? policy.threads : 1;
}

}  // namespace spblas::detail
