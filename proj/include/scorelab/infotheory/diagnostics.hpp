#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "scorelab/infotheory/entropy.hpp"

namespace scorelab {

/// Measured prefactor between the finite-difference rate and nu^2 E tr I_t.
/// The candidates are 1/2 and 1/4; `preferred` is the closer one.
struct FisherFactorDiagnostic {
    std::string name = "fisher-prefactor";
    double ratio = 0.0;
    double ratio_stderr = 0.0;
    double preferred = 0.0;
    std::vector<double> sigma2;
    std::vector<double> pointwise_ratio;
};

inline FisherFactorDiagnostic fisher_factor_diagnostic(const DataDistribution& dist, const std::vector<double>& grid,
                                                       std::size_t n_samples, Seed seed) {
    FisherFactorDiagnostic d;
    double num = 0.0, den = 0.0, var_num = 0.0, var_den = 0.0;
    for (double s2 : grid) {
        const auto p = entropy_point(dist, s2, 1.0, n_samples, seed);
        d.sigma2.push_back(s2);
        d.pointwise_ratio.push_back(p.finite_difference.value / p.fisher_trace.value);
        num += p.finite_difference.value;
        den += p.fisher_trace.value;
        var_num += p.finite_difference.std_error * p.finite_difference.std_error;
        var_den += p.fisher_trace.std_error * p.fisher_trace.std_error;
    }
    d.ratio = num / den;
    // First-order propagation, ignoring the (positive) correlation.
    d.ratio_stderr = std::abs(d.ratio) * std::sqrt(var_num / (num * num) + var_den / (den * den));
    d.preferred = std::abs(d.ratio - 0.5) <= std::abs(d.ratio - 0.25) ? 0.5 : 0.25;
    return d;
}

/// Ratio of the Gaussian-subspace entropy rate to the maximal-bandwidth
/// value D_data nu^2 / (2 sigma2), at a large and a small scale h.
struct BandwidthLimitDiagnostic {
    std::string name = "bandwidth-limit";
    double sigma2 = 0.0;
    double h_large = 0.0;
    double h_small = 0.0;
    double ratio_large = 0.0;
    double ratio_small = 0.0;
    std::string maximal_limit;  // "h->inf" or "h->0"
};

inline BandwidthLimitDiagnostic bandwidth_limit_diagnostic(Eigen::Index dim, Eigen::Index data_dim, double sigma2,
                                                           double h_large = 1e3, double h_small = 1e-3,
                                                           std::size_t n_samples = 1000, Seed seed = 0) {
    BandwidthLimitDiagnostic d;
    d.sigma2 = sigma2;
    d.h_large = h_large;
    d.h_small = h_small;
    const double maximal = 0.5 * static_cast<double>(data_dim) / sigma2;
    const auto ratio = [&](double h) {
        const auto dist = DataDistribution::gaussian_subspace(dim, data_dim, h);
        return entropy_point(dist, sigma2, 1.0, n_samples, seed).variance.value / maximal;
    };
    d.ratio_large = ratio(h_large);
    d.ratio_small = ratio(h_small);
    d.maximal_limit = std::abs(d.ratio_large - 1.0) < std::abs(d.ratio_small - 1.0) ? "h->inf" : "h->0";
    return d;
}

}  // namespace scorelab
