#pragma once

#include <cmath>
#include <vector>

#include "scorelab/core/errors.hpp"
#include "scorelab/core/linalg.hpp"
#include "scorelab/core/parallel.hpp"
#include "scorelab/core/rng.hpp"
#include "scorelab/core/stats.hpp"
#include "scorelab/model/schedule.hpp"
#include "scorelab/score/posterior.hpp"

namespace scorelab {

/// Expected divergence of the score, div = E tr J(x_t), split into the
/// data-independent part div1 = -D / sigma2 and delta_div = div - div1.
struct DivergenceReport {
    double t = 0.0;
    double sigma2 = 0.0;
    Estimate div;
    double div1 = 0.0;
    Estimate delta_div;
};

inline DivergenceReport divergence_report(const DataDistribution& dist, double sigma2, std::size_t n_samples,
                                          Seed seed) {
    detail::require_positive_sigma2(sigma2);
    if (n_samples < 1) throw DomainError("divergence_report: n_samples must be >= 1");
    const double d = static_cast<double>(dist.dim());
    const double sigma = std::sqrt(sigma2);
    const auto parts = parallel_map(block_count(n_samples), [&](std::size_t b) {
        RunningStats st;
        Engine eng = make_engine(substream(seed, "divergence", b));
        const std::size_t end = std::min(n_samples, (b + 1) * kSampleBlock);
        for (std::size_t i = b * kSampleBlock; i < end; ++i) {
            const Vector y = dist.sample(eng);
            const Vector x = y + sigma * standard_normal(eng, dist.dim());
            st.add(score_at(dist, x, sigma2).jacobian.trace());
        }
        return st;
    });
    RunningStats total;
    for (const auto& p : parts) total.merge(p);
    DivergenceReport r;
    r.sigma2 = sigma2;
    r.div = to_estimate(total);
    r.div1 = -d / sigma2;
    r.delta_div = {r.div.value - r.div1, r.div.std_error};
    return r;
}

inline DivergenceReport divergence_report(const DataDistribution& dist, const NoiseSchedule& schedule, double t,
                                          std::size_t n_samples, Seed seed) {
    auto r = divergence_report(dist, schedule.sigma2(t), n_samples, seed);
    r.t = t;
    return r;
}

/// dH[x_t]/dt = -nu^2 / 2 * div.
inline Estimate marginal_entropy_rate(const DataDistribution& dist, const NoiseSchedule& schedule, double t,
                                      std::size_t n_samples, Seed seed) {
    const auto r = divergence_report(dist, schedule, t, n_samples, seed);
    const double f = 0.5 * schedule.nu2(t);
    return {-f * r.div.value, f * r.div.std_error};
}

/// H[x_t] = -E log p_t(x_t).
inline Estimate marginal_entropy(const DataDistribution& dist, double sigma2, std::size_t n_samples, Seed seed) {
    detail::require_positive_sigma2(sigma2);
    if (n_samples < 1) throw DomainError("marginal_entropy: n_samples must be >= 1");
    const double sigma = std::sqrt(sigma2);
    const auto parts = parallel_map(block_count(n_samples), [&](std::size_t b) {
        RunningStats st;
        SummaryWorkspace ws(dist);
        Engine eng = make_engine(substream(seed, "marginal-entropy", b));
        const std::size_t end = std::min(n_samples, (b + 1) * kSampleBlock);
        for (std::size_t i = b * kSampleBlock; i < end; ++i) {
            const Vector y = dist.sample(eng);
            const Vector x = y + sigma * standard_normal(eng, dist.dim());
            st.add(-ws.evaluate(dist, x, sigma2).log_density);
        }
        return st;
    });
    RunningStats total;
    for (const auto& p : parts) total.merge(p);
    return to_estimate(total);
}

/// Fisher information of the posterior with respect to x,
/// I_t(x) = (I + sigma2 J(x)) / sigma2 = var(y | x) / sigma^4.
struct FisherSpectrum {
    double t = 0.0;
    double sigma2 = 0.0;
    Vector x;
    Matrix matrix;
    Vector eigenvalues;  // ascending
    int est_manifold_dim = 0;
};

struct FisherBand {
    double lo = 0.5;  // in units of 1 / sigma2
    double hi = 1.5;
};

inline FisherSpectrum fisher_spectrum(const DataDistribution& dist, const Vector& x, double sigma2,
                                      const FisherBand& band = {}) {
    if (!(band.lo < band.hi)) throw DomainError("fisher_spectrum: band must satisfy lo < hi");
    const ScoreEval ev = score_at(dist, x, sigma2);
    FisherSpectrum f;
    f.sigma2 = sigma2;
    f.x = x;
    f.matrix = Matrix::Identity(dist.dim(), dist.dim()) + sigma2 * ev.jacobian;
    f.matrix /= sigma2;
    f.matrix = 0.5 * (f.matrix + f.matrix.transpose());
    f.eigenvalues = symmetric_eigen(f.matrix).values;
    const double unit = 1.0 / sigma2;
    for (double v : f.eigenvalues)
        if (v >= band.lo * unit && v <= band.hi * unit) ++f.est_manifold_dim;
    return f;
}

/// Number of Fisher eigenvalues below threshold * sigma^-2.
inline int count_suppressed(const FisherSpectrum& f, double threshold = 1e-8) {
    int n = 0;
    for (double v : f.eigenvalues)
        if (v < threshold / f.sigma2) ++n;
    return n;
}

/// Active-set heuristic E|score|^2 ~ 1 / (sigma2 m): m equally weighted
/// points at mutually orthogonal offsets of norm sigma from a probe at the
/// origin; the exact squared score norm is evaluated at the probe.
struct ActiveSetCheck {
    double predicted = 0.0;
    double exact = 0.0;
    double relative_error = 0.0;
};

inline ActiveSetCheck active_set_norm_check(int m, double sigma2, int dim) {
    if (m < 1) throw DomainError("active_set_norm_check: m must be >= 1");
    if (dim < m) throw DomainError("active_set_norm_check: need D >= m for orthogonal offsets");
    detail::require_positive_sigma2(sigma2);
    Matrix pts = Matrix::Zero(m, dim);
    for (int i = 0; i < m; ++i) pts(i, i) = std::sqrt(sigma2);
    const auto dist = DataDistribution::delta_mixture(pts);
    ActiveSetCheck c;
    c.predicted = 1.0 / (sigma2 * m);
    c.exact = score_at(dist, Vector::Zero(dim), sigma2).score.squaredNorm();
    c.relative_error = std::abs(c.exact - c.predicted) / c.predicted;
    return c;
}

}  // namespace scorelab
