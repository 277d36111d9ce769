#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <variant>

#include "scorelab/core/errors.hpp"
#include "scorelab/core/linalg.hpp"
#include "scorelab/core/rng.hpp"

namespace scorelab {

/// Finite mixture of point masses. `points` is K x D (one row per point).
struct DeltaMixture {
    Matrix points;
    Vector weights;
};

/// Full-rank Gaussian N(mean, covariance).
struct GaussianFull {
    Vector mean;
    Matrix covariance;
};

/// Centered Gaussian with covariance h^2 B B^T on the span of the orthonormal
/// columns of `basis` (D x D_data).
struct GaussianSubspace {
    Matrix basis;
    double h = 1.0;
};

/// Covariance in eigen-form: Sigma0 = U diag(s) U^T. Shared by both Gaussian
/// variants so every closed form is a diagonal operation.
struct GaussianSpectrum {
    Vector mean;
    Matrix eigvecs;
    Vector eigvals;
};

class DataDistribution {
public:
    enum class Kind { delta_mixture, gaussian_full, gaussian_subspace };

    static DataDistribution delta_mixture(Matrix points, Vector weights) {
        const auto k = points.rows();
        if (k < 1 || points.cols() < 1) throw DomainError("delta mixture needs at least one point of dimension >= 1");
        if (weights.size() != k) throw DomainError("delta mixture: weight count must equal point count");
        if (!points.allFinite() || !weights.allFinite()) throw DomainError("delta mixture: non-finite entries");
        if ((weights.array() < 0.0).any()) throw DomainError("delta mixture: negative weight");
        if (std::abs(weights.sum() - 1.0) > 1e-12) throw DomainError("delta mixture: weights must sum to 1");
        for (Eigen::Index i = 0; i < k; ++i)
            for (Eigen::Index j = i + 1; j < k; ++j)
                if ((points.row(i) - points.row(j)).squaredNorm() == 0.0)
                    throw DomainError("delta mixture: duplicate point at rows " + std::to_string(i) + " and " +
                                      std::to_string(j));
        DataDistribution d;
        d.kind_ = Kind::delta_mixture;
        d.columns_ = points.transpose();
        d.log_weights_ = weights.array().log().matrix();
        d.cumulative_.resize(k);
        double acc = 0.0;
        for (Eigen::Index i = 0; i < k; ++i) d.cumulative_(i) = acc += weights(i);
        d.variant_ = DeltaMixture{std::move(points), std::move(weights)};
        return d;
    }

    /// Uniform weights.
    static DataDistribution delta_mixture(Matrix points) {
        const auto k = points.rows();
        return delta_mixture(std::move(points), Vector::Constant(k, 1.0 / static_cast<double>(k)));
    }

    static DataDistribution gaussian(Vector mean, Matrix covariance) {
        const auto dim = mean.size();
        if (dim < 1 || covariance.rows() != dim || covariance.cols() != dim)
            throw DomainError("gaussian: covariance must be D x D");
        if (!mean.allFinite() || !covariance.allFinite()) throw DomainError("gaussian: non-finite entries");
        if ((covariance - covariance.transpose()).norm() > 1e-12 * std::max(1.0, covariance.norm()))
            throw DomainError("gaussian: covariance not symmetric");
        auto eig = symmetric_eigen(covariance);
        if (!(eig.values(0) > 0.0)) throw DomainError("gaussian: covariance not positive definite");
        DataDistribution d;
        d.kind_ = Kind::gaussian_full;
        d.spectrum_ = GaussianSpectrum{mean, eig.vectors, eig.values};
        d.variant_ = GaussianFull{std::move(mean), std::move(covariance)};
        return d;
    }

    static DataDistribution gaussian_subspace(Matrix basis, double h) {
        const auto dim = basis.rows();
        const auto k = basis.cols();
        if (dim < 1 || k < 0 || k > dim) throw DomainError("gaussian_subspace: basis must be D x D_data, D_data <= D");
        if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("gaussian_subspace: h must be positive");
        if ((basis.transpose() * basis - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-10)
            throw DomainError("gaussian_subspace: basis columns not orthonormal");
        // Complete the basis so the orthogonal complement carries exact zeros.
        Eigen::HouseholderQR<Matrix> qr(basis);
        Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
        q.leftCols(k) = basis;
        Vector s = Vector::Zero(dim);
        s.head(k).setConstant(h * h);
        DataDistribution d;
        d.kind_ = Kind::gaussian_subspace;
        d.spectrum_ = GaussianSpectrum{Vector::Zero(dim), std::move(q), std::move(s)};
        d.variant_ = GaussianSubspace{std::move(basis), h};
        return d;
    }

    /// Subspace spanned by the first `data_dim` coordinate axes of R^dim.
    static DataDistribution gaussian_subspace(Eigen::Index dim, Eigen::Index data_dim, double h) {
        return gaussian_subspace(Matrix::Identity(dim, data_dim), h);
    }

    Kind kind() const { return kind_; }
    bool is_mixture() const { return kind_ == Kind::delta_mixture; }
    bool is_gaussian() const { return !is_mixture(); }

    Eigen::Index dim() const {
        return is_mixture() ? std::get<DeltaMixture>(variant_).points.cols() : spectrum_.mean.size();
    }

    const DeltaMixture& mixture() const {
        if (!is_mixture()) throw UnsupportedError("distribution is not a delta mixture");
        return std::get<DeltaMixture>(variant_);
    }
    const GaussianSpectrum& spectrum() const {
        if (!is_gaussian()) throw UnsupportedError("distribution is not Gaussian");
        return spectrum_;
    }
    const std::variant<DeltaMixture, GaussianFull, GaussianSubspace>& variant() const { return variant_; }

    /// Points as D x K columns (mixture only).
    const Matrix& columns() const { return columns_; }
    const Vector& log_weights() const { return log_weights_; }

    Vector mean() const {
        if (is_mixture()) {
            const auto& m = mixture();
            return m.points.transpose() * m.weights;
        }
        return spectrum_.mean;
    }

    /// Typical data length scale: largest distance of a data point from the
    /// origin (mixtures) or largest standard deviation plus mean norm
    /// (Gaussians). Falls back to 1 for a point mass at the origin.
    double scale() const {
        double s = 0.0;
        if (is_mixture()) {
            s = std::sqrt(columns_.colwise().squaredNorm().maxCoeff());
        } else {
            s = std::sqrt(spectrum_.eigvals.maxCoeff()) + spectrum_.mean.norm();
        }
        return s > 0.0 ? s : 1.0;
    }

    /// Smallest sigma^2 reverse integration may reach.
    double sigma2_floor() const { return 1e-6 * scale() * scale(); }

    Vector sample(Engine& eng) const {
        if (is_mixture()) {
            return columns_.col(pick_index(eng));
        }
        Vector xi = standard_normal(eng, dim());
        return spectrum_.mean + spectrum_.eigvecs * (spectrum_.eigvals.array().sqrt() * xi.array()).matrix();
    }

    /// Draws a mixture component index with probability weights(j).
    Eigen::Index pick_index(Engine& eng) const {
        std::uniform_real_distribution<double> u(0.0, cumulative_(cumulative_.size() - 1));
        const double r = u(eng);
        const auto* first = cumulative_.data();
        const auto* it = std::upper_bound(first, first + cumulative_.size(), r);
        auto i = static_cast<Eigen::Index>(it - first);
        return std::min<Eigen::Index>(i, cumulative_.size() - 1);
    }

    std::string kind_name() const {
        switch (kind_) {
            case Kind::delta_mixture: return "delta-mixture";
            case Kind::gaussian_full: return "gaussian-full";
            case Kind::gaussian_subspace: return "gaussian-subspace";
        }
        return "";
    }

private:
    DataDistribution() = default;

    Kind kind_ = Kind::delta_mixture;
    std::variant<DeltaMixture, GaussianFull, GaussianSubspace> variant_;
    Matrix columns_;
    Vector log_weights_;
    Vector cumulative_;
    GaussianSpectrum spectrum_;
};

}  // namespace scorelab
