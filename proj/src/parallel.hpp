#pragma once

// Internal helpers: index-parallel loops and compensated reductions.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace nlx::detail {

inline unsigned resolve_workers(unsigned requested, std::size_t n) {
    unsigned w = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(w, std::max<std::size_t>(n, 1)));
}

/// Calls fn(i) for i in [0, n). Work is handed out in blocks; results must be written to
/// per-index slots so the outcome does not depend on the schedule.
template <typename F>
void parallel_for(std::size_t n, unsigned workers, F&& fn) {
    const unsigned w = resolve_workers(workers, n);
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    constexpr std::size_t kBlock = 64;
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        try {
            for (;;) {
                const std::size_t begin = next.fetch_add(kBlock);
                if (begin >= n) return;
                const std::size_t end = std::min(n, begin + kBlock);
                for (std::size_t i = begin; i < end; ++i) fn(i);
            }
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next.store(n);
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(w);
    for (unsigned t = 0; t < w; ++t) threads.emplace_back(body);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

/// Neumaier-compensated sum.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct SampleMoments {
    double mean = 0.0;
    double stderr_ = 0.0;
};

/// Mean and standard error of the mean, reduced in index order.
inline SampleMoments sample_moments(std::span<const double> values) {
    SampleMoments out;
    const std::size_t n = values.size();
    if (n == 0) return out;
    CompensatedSum s;
    for (double v : values) s.add(v);
    out.mean = s.value() / static_cast<double>(n);
    if (n > 1) {
        CompensatedSum q;
        for (double v : values) q.add((v - out.mean) * (v - out.mean));
        out.stderr_ = std::sqrt(q.value() / static_cast<double>(n - 1) / static_cast<double>(n));
    }
    return out;
}

}  // namespace nlx::detail
