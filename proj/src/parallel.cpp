#include "harmonize/parallel.hpp"

#include <omp.h>

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>

namespace harmonize {

namespace {

std::atomic<int> g_threads{0};

int threads_from_env() {
    const char* env = std::getenv("HARMONIZE_THREADS");
    if (env != nullptr) {
        try {
            int n = std::stoi(env);
            if (n > 0) return n;
        } catch (...) {
        }
    }
    return omp_get_max_threads();
}

}  // namespace

int thread_count() {
    int n = g_threads.load();
    if (n <= 0) {
        n = threads_from_env();
        g_threads.store(n);
    }
    return n;
}

void set_thread_count(int n) { g_threads.store(n > 0 ? n : threads_from_env()); }

void for_each_index(std::size_t n, Exec exec, const std::function<void(std::size_t)>& body) {
    if (exec == Exec::Serial || omp_in_parallel() || thread_count() == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count())
    for (long long i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace harmonize
