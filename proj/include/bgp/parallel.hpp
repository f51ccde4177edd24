// parallel.hpp — tiny worker pool for independent (K, seed) work items.
#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bgp {

/// Runs fn(0..count-1) across up to `jobs` threads; the first exception is
/// rethrown after all workers drain. jobs <= 1 runs inline.
template <class Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn&& fn) {
    if (count == 0) return;
    if (jobs > count) jobs = static_cast<unsigned>(count);
    if (jobs <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (unsigned w = 0; w < jobs; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (std::thread& worker : pool) worker.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace bgp
