#pragma once

#include <cmath>

#include "scorelab/dynamics/integrate.hpp"

namespace scorelab {

/// Local Lyapunov spectrum: raw eigenvalues of the score Jacobian at (x, sigma2).
/// Positive eigenvalues amplify perturbations under the reverse flow.
struct LyapunovReport {
    double sigma2 = 0.0;
    Vector x;
    Vector eigenvalues;  // ascending
    Matrix eigenvectors;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
    int unstable_subspace_dim = 0;
};

inline LyapunovReport lyapunov_at(const DataDistribution& dist, const Vector& x, double sigma2) {
    const ScoreEval ev = score_at(dist, x, sigma2);
    const auto eig = symmetric_eigen(ev.jacobian);
    LyapunovReport r;
    r.sigma2 = sigma2;
    r.x = x;
    r.eigenvalues = eig.values;
    r.eigenvectors = eig.vectors;
    r.min_eigenvalue = eig.values(0);
    r.max_eigenvalue = eig.values(eig.values.size() - 1);
    r.unstable_subspace_dim = static_cast<int>((eig.values.array() > 0.0).count());
    return r;
}

struct SeparationOptions {
    double epsilon = 1e-6;
    std::size_t n_steps = 2000;
};

/// Finite-time separation rate of two reverse-ODE trajectories started at x
/// and x + eps w, over the window [t - tau, t]:
///   rate = log(|dx(t - tau)| / eps) / tau.
/// `rate_refined` repeats the measurement with eps / 10.
struct SeparationRate {
    double rate = 0.0;
    double rate_refined = 0.0;
};

inline SeparationRate separation_rate(const DataDistribution& dist, const NoiseSchedule& schedule, const Vector& x,
                                      double t, const Vector& direction, double tau,
                                      const SeparationOptions& options = {}) {
    detail::require_dim(dist, x);
    detail::require_dim(dist, direction);
    if (std::abs(direction.norm() - 1.0) > 1e-9) throw DomainError("separation_rate: direction must be a unit vector");
    if (!(tau > 0.0) || !(t - tau > 0.0)) throw DomainError("separation_rate: window must satisfy 0 < tau < t");
    ReverseOptions opts;
    opts.record_path = false;
    auto endpoint = [&](const Vector& start) {
        opts.initial = start;
        return integrate_reverse(dist, schedule, t, t - tau, options.n_steps, TrajectoryMode::reverse_ode, 0, opts)
            .states.back();
    };
    const Vector base = endpoint(x);
    auto rate_for = [&](double eps) {
        const double sep = (endpoint(x + eps * direction) - base).norm();
        if (!(sep > 0.0)) throw NumericError("separation_rate: perturbation lost to rounding");
        return std::log(sep / eps) / tau;
    };
    return {rate_for(options.epsilon), rate_for(options.epsilon / 10.0)};
}

}  // namespace scorelab
