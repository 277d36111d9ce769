#pragma once

#include <cmath>
#include <functional>
#include <sstream>

#include "scorelab/core/parallel.hpp"
#include "scorelab/core/rng.hpp"
#include "scorelab/core/stats.hpp"
#include "scorelab/score/posterior.hpp"

namespace scorelab {

/// Normalized score-network surrogate s(x; theta), evaluated at (x, sigma2).
/// The exact minimizer of the denoising loss is E[z | x] = -sigma * score.
using DenoiserFn = std::function<Vector(const Vector& x, double sigma2)>;

/// Monte Carlo estimates of the three terms of the denoising decomposition,
/// all in z-units (multiply by sigma^2 to convert to data units):
///   L_d  = E|z - s|^2
///   L_sm = E|E[z|x] - s|^2
///   C_t  = E|z - E[z|x]|^2
/// `residual` is the paired per-sample estimate of L_d - L_sm - C_t.
struct LossDecomposition {
    Estimate denoising;
    Estimate score_matching;
    Estimate constant;
    Estimate residual;
    Estimate posterior_trace_var;  // E tr var(y | x), data units
};

/// The exact-score candidate: x -> E[z | x].
inline DenoiserFn exact_denoiser(const DataDistribution& dist) {
    return [&dist](const Vector& x, double sigma2) -> Vector {
        return -std::sqrt(sigma2) * score_at(dist, x, sigma2).score;
    };
}

inline LossDecomposition denoising_loss_decomposition(const DataDistribution& dist, double sigma2,
                                                      const DenoiserFn& candidate, std::size_t n_samples,
                                                      Seed seed) {
    detail::require_positive_sigma2(sigma2);
    if (n_samples < 1) throw DomainError("denoising_loss_decomposition: n_samples must be >= 1");
    const double sigma = std::sqrt(sigma2);
    struct Partial {
        RunningStats ld, lsm, c, res, tv;
    };
    const auto partials = parallel_map(block_count(n_samples), [&](std::size_t b) {
        Partial p;
        Engine eng = make_engine(substream(seed, "denoising-loss", b));
        const std::size_t end = std::min(n_samples, (b + 1) * kSampleBlock);
        for (std::size_t i = b * kSampleBlock; i < end; ++i) {
            const Vector y = dist.sample(eng);
            const Vector z = standard_normal(eng, dist.dim());
            const Vector x = y + sigma * z;
            const PosteriorStats post = posterior(dist, x, sigma2);
            const Vector ez = (x - post.mean) / sigma;
            const Vector s = candidate(x, sigma2);
            if (s.size() != dist.dim() || !s.allFinite()) {
                std::ostringstream msg;
                msg << "candidate returned a non-finite or mis-sized value at x = [" << x.transpose() << "]";
                throw EvaluationError(msg.str());
            }
            const double ld = (z - s).squaredNorm();
            const double lsm = (ez - s).squaredNorm();
            const double c = (z - ez).squaredNorm();
            p.ld.add(ld);
            p.lsm.add(lsm);
            p.c.add(c);
            p.res.add(ld - lsm - c);
            p.tv.add(post.trace_var);
        }
        return p;
    });
    Partial total;
    for (const auto& p : partials) {
        total.ld.merge(p.ld);
        total.lsm.merge(p.lsm);
        total.c.merge(p.c);
        total.res.merge(p.res);
        total.tv.merge(p.tv);
    }
    return {to_estimate(total.ld), to_estimate(total.lsm), to_estimate(total.c), to_estimate(total.res),
            to_estimate(total.tv)};
}

}  // namespace scorelab
