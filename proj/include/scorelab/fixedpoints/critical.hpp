#pragma once

#include <cmath>
#include <vector>

#include "scorelab/core/errors.hpp"
#include "scorelab/fixedpoints/tree.hpp"

namespace scorelab {

/// Fit window below t_c: n_points depths log-spaced in [depth_min, depth_max],
/// each a fraction of t_c, so that t = t_c (1 - depth).
struct CriticalWindow {
    std::size_t n_points = 12;
    double depth_min = 1e-4;
    double depth_max = 1e-2;
};

/// |child - parent| ~ amplitude * (t_c - t)^exponent.
struct CriticalFit {
    double exponent = 0.0;
    double amplitude = 0.0;
    double fit_residual = 0.0;  // rms residual of the log-log fit
    std::size_t n_used = 0;
    std::vector<double> depth;       // t_c - t
    std::vector<double> separation;  // |child - parent|
};

/// Re-solves the first child and the (now unstable) parent continuation of
/// a continuous branch event at every window depth, then fits the log-log slope.
inline CriticalFit critical_exponent(const DataDistribution& dist, const NoiseSchedule& schedule,
                                     const FixedPointTree& tree, std::size_t event_index,
                                     const CriticalWindow& window = {}) {
    if (event_index >= tree.branch_events.size()) throw DomainError("critical_exponent: no such branch event");
    const BranchEvent& ev = tree.branch_events[event_index];
    if (ev.kind != BranchKind::continuous || ev.child_paths.empty())
        throw DomainError("critical_exponent: event is not a continuous branching");
    if (window.n_points < 2 || !(window.depth_min > 0.0) || !(window.depth_max > window.depth_min) ||
        !(window.depth_max < 1.0))
        throw DomainError("critical_exponent: invalid window");

    const double tc = ev.t_branch;
    const Vector& xc = ev.x_branch;
    const auto& child_nodes = tree.paths[static_cast<std::size_t>(ev.child_paths.front())].nodes;
    const FixedPointNode* seed = nullptr;
    for (const auto& n : child_nodes)
        if (n.t < tc && (n.x_star - xc).norm() > 0.0) {
            seed = &n;
            break;
        }
    if (!seed) throw InsufficientDataError("critical_exponent: child path has no nodes below t_c");

    // Walk from the deepest depth toward t_c so each solve is warm-started by
    // the square-root predictor.
    Vector child = seed->x_star;
    double prev_depth = tc - seed->t;
    FixedPointOptions newton;
    newton.strategy = FixedPointStrategy::newton;
    newton.max_iter = 200;

    CriticalFit fit;
    const double ratio = std::log(window.depth_min / window.depth_max);
    for (std::size_t i = 0; i < window.n_points; ++i) {
        const double frac = window.depth_max *
                            std::exp(ratio * static_cast<double>(i) / static_cast<double>(window.n_points - 1));
        const double t = tc * (1.0 - frac);
        const double depth = tc - t;
        if (!(t > 0.0)) continue;
        const double s2 = schedule.sigma2(t);
        const Vector guess = xc + (child - xc) * std::sqrt(depth / prev_depth);
        try {
            const auto c = solve_fixed_point(dist, guess, s2, newton);
            const auto p = solve_fixed_point(dist, xc, s2, newton);
            const double sep = (c.x_star - p.x_star).norm();
            if (!(sep > 0.0)) continue;
            child = c.x_star;
            prev_depth = depth;
            fit.depth.push_back(depth);
            fit.separation.push_back(sep);
        } catch (const NumericError&) {
            continue;
        }
    }
    fit.n_used = fit.depth.size();
    if (fit.n_used < 5) throw InsufficientDataError("critical_exponent: fewer than 5 usable window points");

    double mx = 0.0, my = 0.0;
    const double n = static_cast<double>(fit.n_used);
    for (std::size_t i = 0; i < fit.n_used; ++i) {
        mx += std::log(fit.depth[i]);
        my += std::log(fit.separation[i]);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < fit.n_used; ++i) {
        const double dx = std::log(fit.depth[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(fit.separation[i]) - my);
    }
    fit.exponent = sxy / sxx;
    const double intercept = my - fit.exponent * mx;
    fit.amplitude = std::exp(intercept);
    double ss = 0.0;
    for (std::size_t i = 0; i < fit.n_used; ++i) {
        const double r = std::log(fit.separation[i]) - intercept - fit.exponent * std::log(fit.depth[i]);
        ss += r * r;
    }
    fit.fit_residual = std::sqrt(ss / n);
    return fit;
}

}  // namespace scorelab
