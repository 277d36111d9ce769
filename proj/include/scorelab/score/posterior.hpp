#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "scorelab/core/errors.hpp"
#include "scorelab/core/linalg.hpp"
#include "scorelab/model/distribution.hpp"

namespace scorelab {

/// Exact posterior p(y | x) under x = y + sigma z.
struct PosteriorStats {
    Vector weights;      // mixture only, sums to 1
    Vector log_weights;  // mixture only
    Vector mean;         // E[y | x]
    Matrix covariance;   // var(y | x)
    double trace_var = 0.0;
};

/// Exact score and its Jacobian at (x, sigma2).
struct ScoreEval {
    Vector x;
    double sigma2 = 0.0;
    Vector score;     // grad log p_t(x)
    Matrix jacobian;  // Hessian of log p_t(x), symmetric
};

namespace detail {

inline void require_dim(const DataDistribution& dist, const Vector& x) {
    if (x.size() != dist.dim())
        throw DomainError("point has dimension " + std::to_string(x.size()) + ", distribution has " +
                          std::to_string(dist.dim()));
    if (!x.allFinite()) throw DomainError("point has non-finite coordinates");
}

inline void require_positive_sigma2(double sigma2) {
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
        throw DomainError("sigma2 must be positive and finite, got " + std::to_string(sigma2));
}

/// Log-space mixture responsibilities; `logits` receives log w_j.
/// Returns log sum_j pi_j exp(-|x - y_j|^2 / (2 sigma2)).
inline double mixture_log_weights(const DataDistribution& dist, const Vector& x, double sigma2, double* logits) {
    const Matrix& cols = dist.columns();
    const Vector& lw = dist.log_weights();
    const Eigen::Index k = cols.cols();
    const double inv = 0.5 / sigma2;
    for (Eigen::Index j = 0; j < k; ++j) logits[j] = lw(j) - (cols.col(j) - x).squaredNorm() * inv;
    const double lse = log_sum_exp(logits, k);
    for (Eigen::Index j = 0; j < k; ++j) logits[j] -= lse;
    return lse;
}

}  // namespace detail

/// Posterior statistics. Noise level is given as sigma^2 (equal to t under
/// the default schedule). sigma2 = 0 is accepted for mixtures only when x is
/// one of the data points.
inline PosteriorStats posterior(const DataDistribution& dist, const Vector& x, double sigma2) {
    detail::require_dim(dist, x);
    const auto d = dist.dim();
    PosteriorStats out;
    if (dist.is_mixture()) {
        const Matrix& cols = dist.columns();
        const Eigen::Index k = cols.cols();
        if (sigma2 == 0.0) {
            for (Eigen::Index j = 0; j < k; ++j) {
                if ((cols.col(j) - x).squaredNorm() == 0.0) {
                    out.weights = Vector::Zero(k);
                    out.weights(j) = 1.0;
                    out.log_weights = Vector::Constant(k, -std::numeric_limits<double>::infinity());
                    out.log_weights(j) = 0.0;
                    out.mean = cols.col(j);
                    out.covariance = Matrix::Zero(d, d);
                    return out;
                }
            }
            throw SingularPosteriorError("posterior at sigma2 = 0 requires x to be a data point");
        }
        detail::require_positive_sigma2(sigma2);
        out.log_weights.resize(k);
        detail::mixture_log_weights(dist, x, sigma2, out.log_weights.data());
        out.weights = out.log_weights.array().exp().matrix();
        out.mean = cols * out.weights;
        // Centered on the posterior mean before accumulating.
        const Matrix centered = cols.colwise() - out.mean;
        out.covariance = centered * out.weights.asDiagonal() * centered.transpose();
        out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
        out.trace_var = out.covariance.trace();
        return out;
    }
    detail::require_positive_sigma2(sigma2);
    const auto& g = dist.spectrum();
    const Vector shrink = (g.eigvals.array() / (g.eigvals.array() + sigma2)).matrix();
    out.mean = g.mean + g.eigvecs * shrink.asDiagonal() * (g.eigvecs.transpose() * (x - g.mean));
    out.covariance = g.eigvecs * (sigma2 * shrink).asDiagonal() * g.eigvecs.transpose();
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
    out.trace_var = sigma2 * shrink.sum();
    return out;
}

inline ScoreEval score_at(const DataDistribution& dist, const Vector& x, double sigma2) {
    detail::require_dim(dist, x);
    detail::require_positive_sigma2(sigma2);
    ScoreEval out{x, sigma2, Vector(), Matrix()};
    if (dist.is_mixture()) {
        const PosteriorStats post = posterior(dist, x, sigma2);
        out.score = (post.mean - x) / sigma2;
        out.jacobian = post.covariance / (sigma2 * sigma2);
        out.jacobian.diagonal().array() -= 1.0 / sigma2;
        return out;
    }
    const auto& g = dist.spectrum();
    const Vector inv = (1.0 / (g.eigvals.array() + sigma2)).matrix();
    out.jacobian = -(g.eigvecs * inv.asDiagonal() * g.eigvecs.transpose());
    out.jacobian = 0.5 * (out.jacobian + out.jacobian.transpose());
    out.score = out.jacobian * (x - g.mean);
    return out;
}

/// log p_t(x) for the noised distribution.
inline double log_density(const DataDistribution& dist, const Vector& x, double sigma2) {
    detail::require_dim(dist, x);
    detail::require_positive_sigma2(sigma2);
    const double d = static_cast<double>(dist.dim());
    if (dist.is_mixture()) {
        std::vector<double> buf(static_cast<std::size_t>(dist.columns().cols()));
        const double lse = detail::mixture_log_weights(dist, x, sigma2, buf.data());
        return lse - 0.5 * d * std::log(2.0 * std::numbers::pi * sigma2);
    }
    const auto& g = dist.spectrum();
    const Vector c = g.eigvecs.transpose() * (x - g.mean);
    const Vector var = (g.eigvals.array() + sigma2).matrix();
    return -0.5 * ((c.array().square() / var.array()).sum() + var.array().log().sum() +
                   d * std::log(2.0 * std::numbers::pi));
}

/// Per-point scalars used by the Monte Carlo estimators, computed without
/// forming D x D matrices.
struct PointSummary {
    double trace_var = 0.0;    // tr var(y | x)
    double score_norm2 = 0.0;  // |grad log p_t(x)|^2
    double entropy = 0.0;      // -sum_j w_j log w_j (mixtures), nats
    double log_density = 0.0;  // log p_t(x)
};

/// Scratch space reused across calls on one thread.
class SummaryWorkspace {
public:
    explicit SummaryWorkspace(const DataDistribution& dist)
        : logits_(static_cast<std::size_t>(dist.is_mixture() ? dist.columns().cols() : 0)),
          mean_(dist.dim()) {}

    PointSummary evaluate(const DataDistribution& dist, const Vector& x, double sigma2) {
        PointSummary s;
        const double d = static_cast<double>(dist.dim());
        if (dist.is_mixture()) {
            const Matrix& cols = dist.columns();
            const Eigen::Index k = cols.cols();
            const double lse = detail::mixture_log_weights(dist, x, sigma2, logits_.data());
            mean_.setZero();
            double entropy = 0.0;
            for (Eigen::Index j = 0; j < k; ++j) {
                const double w = std::exp(logits_[static_cast<std::size_t>(j)]);
                if (w == 0.0) continue;
                mean_.noalias() += w * cols.col(j);
                entropy -= w * logits_[static_cast<std::size_t>(j)];
            }
            double tv = 0.0;
            for (Eigen::Index j = 0; j < k; ++j) {
                const double w = std::exp(logits_[static_cast<std::size_t>(j)]);
                if (w == 0.0) continue;
                tv += w * (cols.col(j) - mean_).squaredNorm();
            }
            s.trace_var = tv;
            s.score_norm2 = (mean_ - x).squaredNorm() / (sigma2 * sigma2);
            s.entropy = entropy;
            s.log_density = lse - 0.5 * d * std::log(2.0 * std::numbers::pi * sigma2);
            return s;
        }
        const auto& g = dist.spectrum();
        const Vector c = g.eigvecs.transpose() * (x - g.mean);
        const Vector var = (g.eigvals.array() + sigma2).matrix();
        s.trace_var = sigma2 * (g.eigvals.array() / var.array()).sum();
        s.score_norm2 = (c.array().square() / var.array().square()).sum();
        s.entropy = std::numeric_limits<double>::quiet_NaN();
        s.log_density = -0.5 * ((c.array().square() / var.array()).sum() + var.array().log().sum() +
                                d * std::log(2.0 * std::numbers::pi));
        return s;
    }

    /// Score only; `out` must have size D.
    void score(const DataDistribution& dist, const Vector& x, double sigma2, Vector& out) {
        if (dist.is_mixture()) {
            const Matrix& cols = dist.columns();
            const Eigen::Index k = cols.cols();
            detail::mixture_log_weights(dist, x, sigma2, logits_.data());
            mean_.setZero();
            for (Eigen::Index j = 0; j < k; ++j) {
                const double w = std::exp(logits_[static_cast<std::size_t>(j)]);
                if (w != 0.0) mean_.noalias() += w * cols.col(j);
            }
            out = (mean_ - x) / sigma2;
            return;
        }
        const auto& g = dist.spectrum();
        const Vector c = g.eigvecs.transpose() * (x - g.mean);
        out.noalias() = -(g.eigvecs * (c.array() / (g.eigvals.array() + sigma2)).matrix());
    }

private:
    std::vector<double> logits_;
    Vector mean_;
};

}  // namespace scorelab
