#pragma once

#include <cmath>
#include <limits>

#include "scorelab/core/errors.hpp"
#include "scorelab/core/linalg.hpp"
#include "scorelab/score/posterior.hpp"

namespace scorelab {

/// A fixed point of the score, grad log p_t(x*) = 0, with its Jacobian spectrum.
struct FixedPointNode {
    double t = 0.0;
    double sigma2 = 0.0;
    Vector x_star;
    double residual = 0.0;  // |score(x*)|
    Vector eigenvalues;     // ascending
    Matrix eigenvectors;
    bool stable = false;    // all eigenvalues < -eps_stab
    int grid_index = -1;    // -1 for nodes inserted by refinement
};

enum class FixedPointStrategy {
    /// Self-consistency steps x <- E[y|x] until the Jacobian is negative
    /// definite, then damped Newton. Converges to stable fixed points.
    ascent,
    /// Damped Newton from the initial point; reaches saddles too. Used for
    /// warm-started continuation.
    newton,
};

struct FixedPointOptions {
    FixedPointStrategy strategy = FixedPointStrategy::ascent;
    double tolerance = 1e-9;  // residual <= tolerance * scale / sigma2
    int max_iter = 50000;
};

/// Stability threshold eps_stab = 1e-8 / sigma2.
inline double stability_threshold(double sigma2) { return 1e-8 / sigma2; }

inline FixedPointNode make_node(const DataDistribution& dist, const Vector& x, double sigma2, double t = 0.0) {
    const ScoreEval ev = score_at(dist, x, sigma2);
    const auto eig = symmetric_eigen(ev.jacobian);
    FixedPointNode n;
    n.t = t;
    n.sigma2 = sigma2;
    n.x_star = x;
    n.residual = ev.score.norm();
    n.eigenvalues = eig.values;
    n.eigenvectors = eig.vectors;
    n.stable = eig.values(eig.values.size() - 1) < -stability_threshold(sigma2);
    return n;
}

namespace detail {

/// Damped Newton step from x; returns false when no decrease of |score| is found.
inline bool newton_step(const DataDistribution& dist, Vector& x, const ScoreEval& ev, double sigma2) {
    const Eigen::FullPivLU<Matrix> lu(ev.jacobian);
    if (!lu.isInvertible()) return false;
    const Vector dx = -lu.solve(ev.score);
    if (!dx.allFinite()) return false;
    const double r0 = ev.score.norm();
    for (double alpha = 1.0; alpha > 1e-8; alpha *= 0.5) {
        const Vector trial = x + alpha * dx;
        const double r = score_at(dist, trial, sigma2).score.norm();
        if (r < (1.0 - 1e-4 * alpha) * r0) {
            x = trial;
            return true;
        }
    }
    return false;
}

}  // namespace detail

/// Solves grad log p_t(x) = 0 starting at x_init. Throws ConvergenceError
/// carrying the last residual when max_iter is exhausted.
inline FixedPointNode solve_fixed_point(const DataDistribution& dist, const Vector& x_init, double sigma2,
                                        const FixedPointOptions& options = {}) {
    detail::require_dim(dist, x_init);
    detail::require_positive_sigma2(sigma2);
    const double tol = options.tolerance * dist.scale() / sigma2;
    Vector x = x_init;
    double residual = std::numeric_limits<double>::infinity();
    int stalled = 0;
    for (int it = 0; it < options.max_iter; ++it) {
        const ScoreEval ev = score_at(dist, x, sigma2);
        residual = ev.score.norm();
        if (!std::isfinite(residual)) break;
        if (residual <= tol) {
            // Polish to rounding level where Newton is well posed.
            for (int polish = 0; polish < 4; ++polish) {
                const ScoreEval pe = score_at(dist, x, sigma2);
                if (!detail::newton_step(dist, x, pe, sigma2)) break;
            }
            return make_node(dist, x, sigma2);
        }
        if (options.strategy == FixedPointStrategy::newton) {
            if (!detail::newton_step(dist, x, ev, sigma2) && ++stalled > 3) break;
            continue;
        }
        const Eigen::LLT<Matrix> concave(-ev.jacobian);
        const bool negative_definite = concave.info() == Eigen::Success;
        if (negative_definite && detail::newton_step(dist, x, ev, sigma2)) continue;
        // x <- x + sigma2 * score = E[y | x]
        const Vector next = x + sigma2 * ev.score;
        if ((next - x).norm() == 0.0) {
            if (++stalled > 3) break;
        }
        x = next;
    }
    throw ConvergenceError("fixed-point solve did not converge", residual);
}

/// |x - sum_j w_j(x) y_j|; zero exactly at fixed points of a mixture.
inline double self_consistency_gap(const DataDistribution& dist, const Vector& x, double sigma2) {
    return (posterior(dist, x, sigma2).mean - x).norm();
}

}  // namespace scorelab
