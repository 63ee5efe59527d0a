#ifndef CONFMON_PARALLEL_HPP
#define CONFMON_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace confmon {

/// Worker count from CONFMON_THREADS (0 or unset = hardware concurrency).
inline std::size_t thread_count() {
    std::size_t n = 0;
    if (const char* env = std::getenv("CONFMON_THREADS")) {
        try {
            n = static_cast<std::size_t>(std::stoul(env));
        } catch (const std::exception&) {
            n = 0;
        }
    }
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

/// Runs fn(i) for i in [0, n). Results must be written to per-index slots.
/// If several iterations throw, the exception of the lowest index wins so
/// failures are reported deterministically.
template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t w = 0; w < threads; ++w)
            pool.emplace_back([&] {
                for (std::size_t i; (i = next.fetch_add(1)) < n;) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace confmon

#endif // CONFMON_PARALLEL_HPP
