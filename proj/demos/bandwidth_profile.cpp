// Entropy rate of two deltas at +-1 across noise levels, by every route,
// and the noise level where the rate peaks.

#include <cstdio>

#include "scorelab/infotheory/entropy.hpp"

int main() {
    using namespace scorelab;
    Matrix pts(2, 1);
    pts << -1.0, 1.0;
    const auto data = DataDistribution::delta_mixture(pts);
    const auto prof = entropy_profile(data, NoiseSchedule::constant(), sigma2_grid(0.05, 5.0, 25, true), 20000, 7);

    std::printf("%9s %9s", "sigma2", "H_cond");
    for (Estimator e : kAllEstimators) std::printf(" %9s", column_suffix(e).c_str());
    std::printf("\n");
    const EntropyPoint* peak = &prof.points.front();
    for (const auto& p : prof.points) {
        std::printf("%9.4f %9.5f", p.sigma2, p.h_cond.value);
        for (Estimator e : kAllEstimators) std::printf(" %9.5f", p.rate(e).value);
        std::printf("\n");
        if (p.variance.value > peak->variance.value) peak = &p;
    }
    std::printf("rate peaks near sigma2 = %.4f\n", peak->sigma2);
}
