#pragma once

#include <cstddef>

namespace spikegrad::parallel {

/// Inner kernels only fork a team when the loop body is large enough to pay for it.
inline constexpr std::ptrdiff_t kMinParallelWork = 1 << 16;

inline bool worth_it(std::ptrdiff_t work) { return work >= kMinParallelWork; }

/// Number of OpenMP workers used for batch-level parallelism.
int worker_count();
void set_worker_count(int workers);

/// Parses SPIKEGRAD_WORKERS; returns 0 when unset or invalid.
int workers_from_environment();

}  // namespace spikegrad::parallel
