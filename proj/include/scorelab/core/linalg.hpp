#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "scorelab/core/errors.hpp"

namespace scorelab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct SymmetricEigen {
    Vector values;   // ascending
    Matrix vectors;  // columns match `values`
};

/// Eigen-decomposition of a symmetric matrix with a residual check
/// ||J v - lambda v|| <= tol * ||J||.
inline SymmetricEigen symmetric_eigen(const Matrix& m, double residual_tol = 1e-8) {
    if (m.rows() != m.cols()) throw DomainError("symmetric_eigen: matrix is not square");
    const Matrix sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.info() != Eigen::Success) throw NumericError("symmetric eigensolve failed");
    SymmetricEigen out{solver.eigenvalues(), solver.eigenvectors()};
    const double norm = std::max(sym.norm(), 1e-300);
    for (Eigen::Index i = 0; i < out.values.size(); ++i) {
        const double r = (sym * out.vectors.col(i) - out.values(i) * out.vectors.col(i)).norm();
        if (!(r <= residual_tol * norm + 1e-300)) throw NumericError("symmetric eigensolve residual too large");
    }
    return out;
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline double log_sum_exp(const double* a, Eigen::Index n) {
    double hi = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) hi = std::max(hi, a[i]);
    if (!std::isfinite(hi)) return hi;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) acc += std::exp(a[i] - hi);
    return hi + std::log(acc);
}

}  // namespace scorelab
