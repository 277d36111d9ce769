#pragma once

#include <cmath>
#include <cstddef>

namespace scorelab {

/// Mean / variance accumulator (Welford); `merge` uses Chan's update so
/// block-wise partial results combine deterministically in block order.
class RunningStats {
public:
    void add(double x) {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }

    void merge(const RunningStats& o) {
        if (o.n_ == 0) return;
        if (n_ == 0) {
            *this = o;
            return;
        }
        const double n = static_cast<double>(n_ + o.n_);
        const double d = o.mean_ - mean_;
        mean_ += d * static_cast<double>(o.n_) / n;
        m2_ += o.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
        n_ += o.n_;
    }

    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double stderr_of_mean() const { return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

inline Estimate to_estimate(const RunningStats& s, double scale = 1.0) {
    return {scale * s.mean(), std::abs(scale) * s.stderr_of_mean()};
}

/// sqrt(a^2 + b^2): standard error of a difference of two estimates.
inline double combined_stderr(double a, double b) { return std::hypot(a, b); }

}  // namespace scorelab
