#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <stdexcept>
#include <thread>
#include <vector>

namespace pgtail {

// Runs fn(0), ..., fn(n-1) on up to `workers` threads. Each index is claimed
// by exactly one worker, so jobs own their output slots exclusively and the
// caller sees results in index order regardless of scheduling. The first
// exception (by job index) is rethrown after all workers finish.
template <typename Fn>
inline void run_jobs(std::size_t n, int workers, Fn&& fn) {
    if (workers <= 0) throw std::invalid_argument("run_jobs: workers must be positive");
    if (n == 0) return;
    std::size_t nw = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    if (nw == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    pool.reserve(nw);
    for (std::size_t w = 0; w < nw; ++w)
        pool.emplace_back([&]() {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    for (std::thread& t : pool) t.join();
    for (std::size_t i = 0; i < n; ++i)
        if (errors[i]) std::rethrow_exception(errors[i]);
}

}  // namespace pgtail
