#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "scorelab/core/errors.hpp"

namespace scorelab {

/// Noise schedule of the forward process dx = nu(t) dW.
///
/// Time runs forward from 0 to t_max. Reverse integration is expressed as
/// decreasing t on the same axis. sigma2(t) is the accumulated variance
/// int_0^t nu^2, so sigma2(0) = 0.
class NoiseSchedule {
public:
    enum class Kind { constant, geometric, table };

    /// nu(t) = nu, sigma2(t) = nu^2 t.
    static NoiseSchedule constant(double nu = 1.0, double t_max = 1e6) {
        if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("constant schedule: nu must be positive");
        if (!(t_max > 0.0)) throw DomainError("constant schedule: t_max must be positive");
        NoiseSchedule s(Kind::constant, t_max);
        s.a_ = nu * nu;
        return s;
    }

    /// Variance-exploding geometric schedule on t in [0, t_max]:
    /// sigma2(t) = sigma_min^2 ((sigma_max/sigma_min)^(2t/t_max) - 1).
    static NoiseSchedule geometric(double sigma_min, double sigma_max, double t_max = 1.0) {
        if (!(sigma_min > 0.0) || !(sigma_max > sigma_min))
            throw DomainError("geometric schedule: need 0 < sigma_min < sigma_max");
        if (!(t_max > 0.0)) throw DomainError("geometric schedule: t_max must be positive");
        NoiseSchedule s(Kind::geometric, t_max);
        s.a_ = sigma_min * sigma_min;
        s.b_ = 2.0 * std::log(sigma_max / sigma_min) / t_max;
        return s;
    }

    /// Piecewise-linear nu^2 through (times[i], nu2[i]); times[0] must be 0.
    /// nu^2 may touch zero at isolated knots but not on a whole segment.
    static NoiseSchedule table(std::vector<double> times, std::vector<double> nu2) {
        if (times.size() < 2 || times.size() != nu2.size())
            throw DomainError("table schedule: need >= 2 knots with matching nu2 values");
        if (times.front() != 0.0) throw DomainError("table schedule: first knot must be t = 0");
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (!std::isfinite(times[i]) || !std::isfinite(nu2[i]) || nu2[i] < 0.0)
                throw DomainError("table schedule: knots must be finite with nu2 >= 0");
            if (i > 0 && !(times[i] > times[i - 1])) throw DomainError("table schedule: times must increase");
            if (i > 0 && nu2[i] == 0.0 && nu2[i - 1] == 0.0)
                throw DomainError("table schedule: nu2 vanishes on a segment");
        }
        NoiseSchedule s(Kind::table, times.back());
        s.cumulative_.assign(times.size(), 0.0);
        for (std::size_t i = 1; i < times.size(); ++i)
            s.cumulative_[i] = s.cumulative_[i - 1] + 0.5 * (nu2[i] + nu2[i - 1]) * (times[i] - times[i - 1]);
        s.knots_ = std::move(times);
        s.nu2_ = std::move(nu2);
        return s;
    }

    Kind kind() const { return kind_; }
    double t_min() const { return 0.0; }
    double t_max() const { return t_max_; }

    double nu2(double t) const {
        check_time(t);
        switch (kind_) {
            case Kind::constant: return a_;
            case Kind::geometric: return a_ * b_ * std::exp(b_ * t);
            case Kind::table: {
                const std::size_t i = segment(t);
                const double f = (t - knots_[i]) / (knots_[i + 1] - knots_[i]);
                return nu2_[i] + f * (nu2_[i + 1] - nu2_[i]);
            }
        }
        return 0.0;
    }

    double nu(double t) const { return std::sqrt(nu2(t)); }

    double sigma2(double t) const {
        check_time(t);
        switch (kind_) {
            case Kind::constant: return a_ * t;
            case Kind::geometric: return a_ * std::expm1(b_ * t);
            case Kind::table: {
                const std::size_t i = segment(t);
                const double d = t - knots_[i];
                const double slope = (nu2_[i + 1] - nu2_[i]) / (knots_[i + 1] - knots_[i]);
                return cumulative_[i] + nu2_[i] * d + 0.5 * slope * d * d;
            }
        }
        return 0.0;
    }

    double sigma(double t) const { return std::sqrt(sigma2(t)); }

    /// Inverse of sigma2 on [0, t_max].
    double time_at(double sigma2_value) const {
        if (!(sigma2_value >= 0.0)) throw DomainError("time_at: sigma2 must be >= 0");
        if (sigma2_value > sigma2(t_max_) * (1.0 + 1e-12))
            throw DomainError("time_at: sigma2 " + std::to_string(sigma2_value) + " beyond schedule range");
        switch (kind_) {
            case Kind::constant: return std::min(t_max_, sigma2_value / a_);
            case Kind::geometric: return std::min(t_max_, std::log1p(sigma2_value / a_) / b_);
            case Kind::table: break;
        }
        double lo = 0.0, hi = t_max_;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
            const double mid = 0.5 * (lo + hi);
            (sigma2(mid) < sigma2_value ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

    // Raw parameters, used for serialization.
    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& knot_nu2() const { return nu2_; }
    double constant_nu() const { return std::sqrt(a_); }
    double geometric_sigma_min() const { return std::sqrt(a_); }
    double geometric_sigma_max() const { return std::sqrt(a_) * std::exp(0.5 * b_ * t_max_); }

private:
    NoiseSchedule(Kind kind, double t_max) : kind_(kind), t_max_(t_max) {}

    void check_time(double t) const {
        if (!(t >= 0.0) || t > t_max_ * (1.0 + 1e-12))
            throw DomainError("time " + std::to_string(t) + " outside [0, " + std::to_string(t_max_) + "]");
    }

    std::size_t segment(double t) const {
        auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
        std::size_t i = it == knots_.begin() ? 0 : static_cast<std::size_t>(it - knots_.begin()) - 1;
        return std::min(i, knots_.size() - 2);
    }

    Kind kind_;
    double t_max_;
    double a_ = 1.0;
    double b_ = 0.0;
    std::vector<double> knots_, nu2_, cumulative_;
};

/// Reverse integration never goes below sigma2 = 1e-6 * (data scale)^2.
inline constexpr double kFloorFraction = 1e-6;

}  // namespace scorelab
