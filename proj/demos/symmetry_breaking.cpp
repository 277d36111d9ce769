// Fixed-point tree of the score field for four points on a square.
// Prints every branch event and the surviving stable points at low noise.

#include <cstdio>

#include "scorelab/fixedpoints/tree.hpp"

int main() {
    using namespace scorelab;
    Matrix pts(4, 2);
    pts << 1, 1, 1, -1, -1, 1, -1, -1;
    const auto data = DataDistribution::delta_mixture(pts);
    const auto sched = NoiseSchedule::constant();
    const auto tree = trace_tree(data, sched, sched.time_at(20.0), sched.time_at(0.01), 300);

    for (const auto& e : tree.branch_events)
        std::printf("%-10s sigma2 = %.4f  parent %d -> %zu children\n", to_string(e.kind).c_str(), e.sigma2_branch,
                    e.parent_path, e.child_paths.size());
    std::printf("stable points at sigma2 = %.3g:\n", tree.grid_sigma2.back());
    for (const auto& p : tree.paths)
        if (p.ended_by_event < 0 && !p.nodes.empty())
            std::printf("  path %d  (%+.4f, %+.4f)\n", p.id, p.nodes.back().x_star(0), p.nodes.back().x_star(1));
}
