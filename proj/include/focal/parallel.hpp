#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <optional>
#include <thread>
#include <type_traits>
#include <vector>

namespace focal {

// Worker count: FOCAL_CALIB_THREADS when set to a positive integer, otherwise
// the hardware concurrency (at least 1).
std::size_t thread_count();

// Evaluates fn(0..n-1) across up to thread_count() threads. Results come back
// in index order, so reductions over them are deterministic. The exception of
// the lowest failing index is rethrown.
template <class F>
auto parallel_map(std::size_t n, F&& fn) -> std::vector<std::invoke_result_t<F&, std::size_t>> {
    using R = std::invoke_result_t<F&, std::size_t>;
    std::vector<std::optional<R>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    const std::size_t workers = std::min(thread_count(), std::max<std::size_t>(n, 1));
    const auto run = [&](std::size_t worker) {
        for (std::size_t i = worker; i < n; i += workers) {
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(run, w);
        }
        for (std::thread& t : pool) {
            t.join();
        }
    }
    for (const std::exception_ptr& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    std::vector<R> results;
    results.reserve(n);
    for (std::optional<R>& r : slots) {
        results.push_back(std::move(*r));
    }
    return results;
}

}  // namespace focal
