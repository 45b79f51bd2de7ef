#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <thread>
#include <vector>

namespace sobext {

inline int& thread_setting() {
    static int n = 0;
    return n;
}

inline void set_thread_count(int n) { thread_setting() = n; }

// explicit setting, then SOBEXT_THREADS, then hardware concurrency
inline int thread_count() {
    if (thread_setting() > 0) return thread_setting();
    if (const char* env = std::getenv("SOBEXT_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// f(i) for i in [0, n); callers write results per index so reductions stay ordered
template <class F>
void parallel_for(std::size_t n, F&& f) {
    std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) f(i);
        });
    for (auto& t : pool) t.join();
}

}  // namespace sobext
