#pragma once

#include <cstddef>
#include <functional>

namespace harmonize {

// Serial runs the reference loops; Parallel fans them out over OpenMP threads.
// Both produce bit-identical results because every loop writes to its own slot
// and reductions happen afterwards in index order.
enum class Exec { Serial, Parallel };

// Thread cap: HARMONIZE_THREADS if set, else the OpenMP default.
int thread_count();
void set_thread_count(int n);

// Runs body(i) for i in [0, n). Parallel mode is ignored inside an existing
// parallel region to avoid oversubscription.
void for_each_index(std::size_t n, Exec exec, const std::function<void(std::size_t)>& body);

}  // namespace harmonize
