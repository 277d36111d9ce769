#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "scorelab/core/errors.hpp"

namespace scorelab {

/// Roots of the mean-field self-consistency x = tanh((x + phi) / sigma2):
/// temperature sigma2, external field phi.
struct CurieWeissSolution {
    double sigma2 = 0.0;
    double phi = 0.0;
    std::vector<double> magnetizations;  // ascending
    std::vector<bool> stable;            // map derivative < 1
};

inline double curie_weiss_residual(double x, double sigma2, double phi) { return x - std::tanh((x + phi) / sigma2); }

inline CurieWeissSolution curie_weiss_solve(double sigma2, double phi) {
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("curie_weiss_solve: sigma2 must be positive");
    if (!std::isfinite(phi)) throw DomainError("curie_weiss_solve: phi must be finite");
    auto f = [&](double x) { return curie_weiss_residual(x, sigma2, phi); };
    const double a = -1.0 - std::abs(phi);
    const double b = 1.0 + std::abs(phi);

    // f' = 1 - sech^2(u)/sigma2 vanishes at u = +-acosh(1/sigma); f is
    // monotone between these points.
    std::vector<double> cuts{a};
    if (sigma2 < 1.0) {
        const double u = std::acosh(1.0 / std::sqrt(sigma2));
        for (double x : {-sigma2 * u - phi, sigma2 * u - phi})
            if (x > a && x < b) cuts.push_back(x);
    }
    cuts.push_back(b);

    std::vector<double> roots;
    auto bisect = [&](double lo, double hi) {
        double flo = f(lo);
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            const double fm = f(mid);
            if (fm == 0.0) return mid;
            if ((fm < 0.0) == (flo < 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        return std::abs(f(lo)) < std::abs(f(hi)) ? lo : hi;
    };
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = cuts[i], hi = cuts[i + 1];
        const double flo = f(lo), fhi = f(hi);
        if (flo == 0.0) roots.push_back(lo);
        if ((flo < 0.0 && fhi > 0.0) || (flo > 0.0 && fhi < 0.0)) roots.push_back(bisect(lo, hi));
    }
    // Tangent (double) roots sit exactly on an interior cut.
    for (std::size_t i = 1; i + 1 < cuts.size(); ++i)
        if (std::abs(f(cuts[i])) <= 1e-14) roots.push_back(cuts[i]);
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(), [](double p, double q) { return std::abs(p - q) <= 1e-12; }),
                roots.end());

    CurieWeissSolution out{sigma2, phi, roots, {}};
    for (double x : roots) {
        const double c = std::cosh((x + phi) / sigma2);
        out.stable.push_back(1.0 / (c * c * sigma2) < 1.0);
    }
    return out;
}

}  // namespace scorelab
