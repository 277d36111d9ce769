#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "scorelab/core/errors.hpp"
#include "scorelab/core/format.hpp"
#include "scorelab/core/parallel.hpp"
#include "scorelab/core/rng.hpp"
#include "scorelab/core/stats.hpp"
#include "scorelab/model/schedule.hpp"
#include "scorelab/score/posterior.hpp"

namespace scorelab {

/// Entropies are in nats; the discrete game reports bits.
inline constexpr double kBitsPerNat = 1.0 / std::numbers::ln2;

/// Constant in front of the Fisher-trace route, rate = c_F nu^2 E tr I_t.
inline constexpr double kFisherRateFactor = 0.5;

/// Relative step of the finite-difference route: Delta sigma^2 = 1e-3 sigma^2.
inline constexpr double kFiniteDifferenceStep = 1e-3;

enum class Estimator { norm, variance, divergence, fisher, finite_difference };

inline constexpr std::array<Estimator, 5> kAllEstimators{Estimator::norm, Estimator::variance, Estimator::divergence,
                                                         Estimator::fisher, Estimator::finite_difference};

inline std::string to_string(Estimator e) {
    switch (e) {
        case Estimator::norm: return "norm";
        case Estimator::variance: return "variance";
        case Estimator::divergence: return "divergence";
        case Estimator::fisher: return "fisher";
        case Estimator::finite_difference: return "finite-difference";
    }
    return "";
}

inline Estimator parse_estimator(const std::string& name) {
    for (Estimator e : kAllEstimators)
        if (to_string(e) == name) return e;
    throw DomainError("unknown estimator '" + name + "'");
}

/// H(y | x) for a Gaussian prior: (1/2) sum log(2 pi e sigma2 s / (s + sigma2))
/// over the nonzero prior eigenvalues s. Directions with s = 0 carry no
/// uncertainty at any noise level and are left out.
inline double gaussian_conditional_entropy(const DataDistribution& dist, double sigma2) {
    if (!dist.is_gaussian()) throw UnsupportedError("gaussian_conditional_entropy: Gaussian data required");
    detail::require_positive_sigma2(sigma2);
    double h = 0.0;
    for (double s : dist.spectrum().eigvals)
        if (s > 0.0) h += 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * sigma2 * s / (s + sigma2));
    return h;
}

/// H(y | x) = -E[log p(y | x)] for a finite mixture, by Monte Carlo over x
/// of the exact per-point entropy -sum_j w_j log w_j.
inline Estimate conditional_entropy(const DataDistribution& dist, double sigma2, std::size_t n_samples, Seed seed) {
    if (!dist.is_mixture())
        throw UnsupportedError("conditional_entropy: mixture data required; use gaussian_conditional_entropy");
    detail::require_positive_sigma2(sigma2);
    if (n_samples < 1) throw DomainError("conditional_entropy: n_samples must be >= 1");
    const double sigma = std::sqrt(sigma2);
    const auto parts = parallel_map(block_count(n_samples), [&](std::size_t b) {
        RunningStats st;
        SummaryWorkspace ws(dist);
        Engine eng = make_engine(substream(seed, "conditional-entropy", b));
        const std::size_t end = std::min(n_samples, (b + 1) * kSampleBlock);
        for (std::size_t i = b * kSampleBlock; i < end; ++i) {
            const Vector y = dist.sample(eng);
            const Vector x = y + sigma * standard_normal(eng, dist.dim());
            st.add(ws.evaluate(dist, x, sigma2).entropy);
        }
        return st;
    });
    RunningStats total;
    for (const auto& p : parts) total.merge(p);
    return to_estimate(total);
}

/// Every estimator route at one noise level. Rates are forward-time dH/dt
/// in nats per unit time (non-negative); the generative bandwidth is the
/// same magnitude read in reverse time.
struct EntropyPoint {
    double sigma2 = 0.0;
    double t = 0.0;
    double nu2 = 1.0;
    Estimate h_cond;
    Estimate norm;
    Estimate variance;
    Estimate divergence;
    Estimate fisher;
    Estimate finite_difference;
    Estimate fisher_trace;  // E tr I_t, no prefactor

    const Estimate& rate(Estimator e) const {
        switch (e) {
            case Estimator::norm: return norm;
            case Estimator::variance: return variance;
            case Estimator::divergence: return divergence;
            case Estimator::fisher: return fisher;
            case Estimator::finite_difference: return finite_difference;
        }
        return norm;
    }
};

namespace detail {

inline double richardson_derivative(const auto& f, double x, double h) {
    const auto central = [&](double step) { return (f(x + step) - f(x - step)) / (2.0 * step); };
    return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

}  // namespace detail

/// All routes at sigma2 with common random numbers: the same (y, z) draws
/// feed every route, and the finite difference evaluates the per-sample
/// entropy at x = y + sqrt(sigma2 +- Delta) z.
inline EntropyPoint entropy_point(const DataDistribution& dist, double sigma2, double nu2, std::size_t n_samples,
                                  Seed seed) {
    detail::require_positive_sigma2(sigma2);
    if (n_samples < 1) throw DomainError("entropy_point: n_samples must be >= 1");
    const double d = static_cast<double>(dist.dim());
    const double sigma = std::sqrt(sigma2);
    const double step = kFiniteDifferenceStep * sigma2;
    const double sig_hi = std::sqrt(sigma2 + step), sig_lo = std::sqrt(sigma2 - step);

    enum { kH, kNorm, kVar, kDiv, kFd, kCount };
    using Stats = std::array<RunningStats, kCount>;
    const auto parts = parallel_map(block_count(n_samples), [&](std::size_t b) {
        Stats st;
        SummaryWorkspace ws(dist);
        Engine eng = make_engine(substream(seed, "entropy-rate", b));
        const std::size_t end = std::min(n_samples, (b + 1) * kSampleBlock);
        for (std::size_t i = b * kSampleBlock; i < end; ++i) {
            const Vector y = dist.sample(eng);
            const Vector z = standard_normal(eng, dist.dim());
            const PointSummary p = ws.evaluate(dist, y + sigma * z, sigma2);
            st[kNorm].add(d / sigma2 - p.score_norm2);
            st[kVar].add(p.trace_var / (sigma2 * sigma2));
            // tr J = -D / sigma2 + tr var / sigma^4
            const double trace_j = -d / sigma2 + p.trace_var / (sigma2 * sigma2);
            st[kDiv].add(trace_j + d / sigma2);
            if (dist.is_mixture()) {
                st[kH].add(p.entropy);
                const double h_hi = ws.evaluate(dist, y + sig_hi * z, sigma2 + step).entropy;
                const double h_lo = ws.evaluate(dist, y + sig_lo * z, sigma2 - step).entropy;
                st[kFd].add((h_hi - h_lo) / (2.0 * step));
            }
        }
        return st;
    });
    Stats total;
    for (const auto& p : parts)
        for (int k = 0; k < kCount; ++k) total[static_cast<std::size_t>(k)].merge(p[static_cast<std::size_t>(k)]);

    EntropyPoint out;
    out.sigma2 = sigma2;
    out.nu2 = nu2;
    out.norm = to_estimate(total[kNorm], 0.5 * nu2);
    out.variance = to_estimate(total[kVar], 0.5 * nu2);
    out.divergence = to_estimate(total[kDiv], 0.5 * nu2);
    // tr I_t = (D + sigma2 tr J) / sigma2 = tr J + D / sigma2
    out.fisher_trace = to_estimate(total[kDiv]);
    out.fisher = to_estimate(total[kDiv], kFisherRateFactor * nu2);
    if (dist.is_mixture()) {
        out.h_cond = to_estimate(total[kH]);
        out.finite_difference = to_estimate(total[kFd], nu2);
    } else {
        out.h_cond = {gaussian_conditional_entropy(dist, sigma2), 0.0};
        const auto h = [&](double s2) { return gaussian_conditional_entropy(dist, s2); };
        out.finite_difference = {nu2 * detail::richardson_derivative(h, sigma2, step), 0.0};
    }
    return out;
}

inline EntropyPoint entropy_point(const DataDistribution& dist, const NoiseSchedule& schedule, double t,
                                  std::size_t n_samples, Seed seed) {
    auto p = entropy_point(dist, schedule.sigma2(t), schedule.nu2(t), n_samples, seed);
    p.t = t;
    return p;
}

/// dH(y | x_t)/dt by one route, nats per unit time.
inline Estimate entropy_rate(const DataDistribution& dist, const NoiseSchedule& schedule, double t, Estimator estimator,
                             std::size_t n_samples, Seed seed) {
    return entropy_point(dist, schedule, t, n_samples, seed).rate(estimator);
}

/// Closed-form rate for Gaussian data, nu^2/2 sum_s s / (sigma2 (s + sigma2)).
inline double gaussian_entropy_rate(const DataDistribution& dist, double sigma2, double nu2 = 1.0) {
    if (!dist.is_gaussian()) throw UnsupportedError("gaussian_entropy_rate: Gaussian data required");
    double r = 0.0;
    for (double s : dist.spectrum().eigvals) r += s / (sigma2 * (s + sigma2));
    return 0.5 * nu2 * r;
}

struct EntropyProfile {
    std::vector<EntropyPoint> points;  // increasing sigma2
};

/// Sigma^2 grid between lo and hi, both included.
inline std::vector<double> sigma2_grid(double lo, double hi, std::size_t n, bool log_spacing) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2) throw DomainError("sigma2_grid: need 0 < min < max and n >= 2");
    std::vector<double> g(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double f = static_cast<double>(k) / static_cast<double>(n - 1);
        g[k] = log_spacing ? lo * std::exp(f * std::log(hi / lo)) : lo + f * (hi - lo);
    }
    g.front() = lo;
    g.back() = hi;
    return g;
}

/// Every route at each grid sigma^2. The sample seed does not depend on the
/// grid index, so neighbouring points share random numbers.
inline EntropyProfile entropy_profile(const DataDistribution& dist, const NoiseSchedule& schedule,
                                      const std::vector<double>& grid, std::size_t n_samples, Seed seed) {
    EntropyProfile prof;
    prof.points = parallel_map(grid.size(), [&](std::size_t k) {
        const double t = schedule.time_at(grid[k]);
        auto p = entropy_point(dist, grid[k], schedule.nu2(t), n_samples, seed);
        p.t = t;
        return p;
    });
    return prof;
}

/// Column suffix used in profile CSV headers.
inline std::string column_suffix(Estimator e) {
    switch (e) {
        case Estimator::norm: return "norm";
        case Estimator::variance: return "var";
        case Estimator::divergence: return "div";
        case Estimator::fisher: return "fisher";
        case Estimator::finite_difference: return "fd";
    }
    return "";
}

/// Columns: sigma2, H_cond, rate_<route>..., stderr_H_cond, stderr_<route>...
inline void write_profile_csv(std::ostream& out, const EntropyProfile& prof,
                              const std::vector<Estimator>& which = {kAllEstimators.begin(), kAllEstimators.end()}) {
    out << "sigma2,H_cond";
    for (Estimator e : which) out << ",rate_" << column_suffix(e);
    out << ",stderr_H_cond";
    for (Estimator e : which) out << ",stderr_" << column_suffix(e);
    out << '\n';
    for (const auto& p : prof.points) {
        out << format_double(p.sigma2) << ',' << format_double(p.h_cond.value);
        for (Estimator e : which) out << ',' << format_double(p.rate(e).value);
        out << ',' << format_double(p.h_cond.std_error);
        for (Estimator e : which) out << ',' << format_double(p.rate(e).std_error);
        out << '\n';
    }
}

}  // namespace scorelab
