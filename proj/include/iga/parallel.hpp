#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace iga {

/// Calls fn(i) for i in [0, n) on up to `limit` threads. Every index runs
/// even when some throw; the lowest-index exception is rethrown at the end.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t limit, Fn&& fn) {
    std::vector<std::exception_ptr> errors(n);
    const auto workers = std::max<std::size_t>(1, std::min(limit, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (auto i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace iga
