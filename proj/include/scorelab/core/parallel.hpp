#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace scorelab {

namespace detail {
inline std::atomic<unsigned>& thread_count_slot() {
    static std::atomic<unsigned> n{1};
    return n;
}

/// Set on pool workers so nested loops run inline.
inline bool& in_worker() {
    thread_local bool flag = false;
    return flag;
}
}  // namespace detail

/// Worker count used by every parallel loop. Results never depend on it:
/// work is split into fixed blocks and reduced in block order.
inline unsigned thread_count() { return detail::thread_count_slot().load(); }
inline void set_thread_count(unsigned n) { detail::thread_count_slot().store(std::max(1u, n)); }

/// Evaluates fn(i) for i in [0, n) and returns the results in index order.
template <class Fn>
auto parallel_map(std::size_t n, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
    using R = decltype(fn(std::size_t{}));
    std::vector<R> out(n);
    const unsigned workers =
        detail::in_worker() ? 1u : static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        const bool was = detail::in_worker();
        detail::in_worker() = true;
        struct Restore {
            bool value;
            ~Restore() { detail::in_worker() = value; }
        } restore{was};
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                out[i] = fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

/// Fixed Monte Carlo block size; part of the reproducibility contract.
inline constexpr std::size_t kSampleBlock = 2048;

inline std::size_t block_count(std::size_t n_samples) { return (n_samples + kSampleBlock - 1) / kSampleBlock; }

}  // namespace scorelab
