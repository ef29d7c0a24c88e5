// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace wgcd {

/// Worker count: WG_THREADS if set and positive, otherwise the hardware concurrency.
inline int worker_count()
{
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("WG_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0)
            n = n > 0 ? std::min(n, cap) : cap;
    }
    return std::max(n, 1);
}

/// Calls fn(i) for i in [0, n). Each index must only write its own output slot.
template <class Fn>
void parallel_for(int n, Fn&& fn)
{
    const int workers = std::min(worker_count(), std::max(n / 64, 1));
    if (workers <= 1) {
        for (int i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            constexpr int chunk = 32;
            for (;;) {
                const int begin = next.fetch_add(chunk);
                if (begin >= n)
                    return;
                const int end = std::min(n, begin + chunk);
                try {
                    for (int i = begin; i < end; ++i)
                        fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    next.store(n);
                    return;
                }
            }
        });
    pool.clear();
    if (error)
        std::rethrow_exception(error);
}

} // namespace wgcd
