#pragma once

#include <cmath>

#include "scorelab/core/rng.hpp"
#include "scorelab/model/distribution.hpp"
#include "scorelab/model/schedule.hpp"

namespace scorelab {

/// One draw of the forward process: x_t = y + sigma(t) z.
struct ForwardSample {
    Vector y;
    Vector z;
    double t = 0.0;
    Vector x_t;
};

/// Draws y then z from a single engine seeded with `seed`; deterministic.
inline ForwardSample sample_forward(const DataDistribution& dist, const NoiseSchedule& schedule, double t, Seed seed) {
    const double s2 = schedule.sigma2(t);
    Engine eng = make_engine(seed);
    ForwardSample out;
    out.t = t;
    out.y = dist.sample(eng);
    out.z = standard_normal(eng, dist.dim());
    out.x_t = out.y + std::sqrt(s2) * out.z;
    return out;
}

}  // namespace scorelab
