#pragma once

#include <functional>

namespace kernelconv {

/// Worker cap: hardware concurrency clamped by the KERNELCONV_THREADS
/// environment variable (read once). Always at least 1.
int max_threads();

/// Runs fn over disjoint row ranges [begin, end), possibly on several
/// threads. Partitioning never affects results; callers write disjoint rows.
void parallel_rows(int rows, const std::function<void(int, int)>& fn);

}  // namespace kernelconv
