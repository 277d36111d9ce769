#pragma once

#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "scorelab/core/errors.hpp"
#include "scorelab/core/format.hpp"
#include "scorelab/core/parallel.hpp"
#include "scorelab/core/rng.hpp"
#include "scorelab/model/distribution.hpp"
#include "scorelab/model/schedule.hpp"
#include "scorelab/score/posterior.hpp"

namespace scorelab {

enum class TrajectoryMode { forward_sde, reverse_sde, reverse_ode };

inline std::string to_string(TrajectoryMode m) {
    switch (m) {
        case TrajectoryMode::forward_sde: return "forward-sde";
        case TrajectoryMode::reverse_sde: return "reverse-sde";
        case TrajectoryMode::reverse_ode: return "reverse-ode";
    }
    return "";
}

/// A sampled path. `times` is strictly monotone (increasing for the forward
/// process, decreasing for reverse modes); `sigma2[i] = sigma2(times[i])`.
struct Trajectory {
    std::vector<double> times;
    std::vector<double> sigma2;
    std::vector<Vector> states;
    TrajectoryMode mode = TrajectoryMode::reverse_ode;
    Seed seed = 0;
};

/// Reverse grid: geometric in sigma^2 from sigma2(t_start) down to
/// sigma2(t_end), n_steps + 1 nodes. Constant Delta sigma^2 / sigma^2 per step.
inline std::vector<double> reverse_sigma2_grid(double s2_start, double s2_end, std::size_t n_steps) {
    std::vector<double> g(n_steps + 1);
    const double ratio = std::log(s2_end / s2_start);
    for (std::size_t k = 0; k <= n_steps; ++k)
        g[k] = s2_start * std::exp(ratio * static_cast<double>(k) / static_cast<double>(n_steps));
    g.front() = s2_start;
    g.back() = s2_end;
    return g;
}

struct ReverseOptions {
    /// Starting state; drawn from N(data mean, sigma2(t_start) I) when empty.
    std::optional<Vector> initial;
    /// Keep every node (true) or only the endpoints (false).
    bool record_path = true;
};

namespace detail {

inline void check_reverse_args(const DataDistribution& dist, const NoiseSchedule& schedule, double t_start,
                               double t_end, std::size_t n_steps, TrajectoryMode mode) {
    if (mode == TrajectoryMode::forward_sde) throw DomainError("integrate_reverse: mode must be a reverse mode");
    if (n_steps < 1) throw DomainError("integrate_reverse: n_steps must be >= 1");
    if (!(t_start > t_end)) throw DomainError("integrate_reverse: need t_start > t_end");
    const double floor = dist.sigma2_floor();
    if (schedule.sigma2(t_end) < floor * (1.0 - 1e-9))
        throw DomainError("integrate_reverse: t_end below the integration floor sigma2 = " + format_double(floor));
}

}  // namespace detail

/// Euler-Maruyama (reverse-sde) or explicit Euler on the probability-flow
/// ODE (reverse-ode), stepping in sigma^2:
///   sde: x <- x + dS * score + sqrt(dS) xi
///   ode: x <- x + dS/2 * score
/// with dS = sigma2_k - sigma2_{k+1} > 0, i.e. nu^2 dt.
inline Trajectory integrate_reverse(const DataDistribution& dist, const NoiseSchedule& schedule, double t_start,
                                    double t_end, std::size_t n_steps, TrajectoryMode mode, Seed seed,
                                    const ReverseOptions& options = {}) {
    detail::check_reverse_args(dist, schedule, t_start, t_end, n_steps, mode);
    const double s2_start = schedule.sigma2(t_start);
    const auto grid = reverse_sigma2_grid(s2_start, schedule.sigma2(t_end), n_steps);
    Engine eng = make_engine(seed);
    Vector x;
    if (options.initial) {
        detail::require_dim(dist, *options.initial);
        x = *options.initial;
    } else {
        x = dist.mean() + std::sqrt(s2_start) * standard_normal(eng, dist.dim());
    }
    Trajectory traj;
    traj.mode = mode;
    traj.seed = seed;
    auto record = [&](std::size_t k) {
        traj.sigma2.push_back(grid[k]);
        traj.times.push_back(k == 0 ? t_start : (k == n_steps ? t_end : schedule.time_at(grid[k])));
        traj.states.push_back(x);
    };
    record(0);
    SummaryWorkspace ws(dist);
    Vector s(dist.dim());
    std::normal_distribution<double> normal;
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double ds = grid[k] - grid[k + 1];
        ws.score(dist, x, grid[k], s);
        if (mode == TrajectoryMode::reverse_ode) {
            x.noalias() += 0.5 * ds * s;
        } else {
            x.noalias() += ds * s;
            const double amp = std::sqrt(ds);
            for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += amp * normal(eng);
        }
        if (!x.allFinite()) throw IntegrationBlowUp(k + 1, "non-finite state");
        if (options.record_path || k + 1 == n_steps) record(k + 1);
    }
    return traj;
}

/// Exact simulation of dx = nu dW from y ~ dist on a uniform time grid.
/// With n_steps = 1 the endpoint equals sample_forward(dist, schedule, t_end, seed).x_t.
inline Trajectory integrate_forward(const DataDistribution& dist, const NoiseSchedule& schedule, double t_end,
                                    std::size_t n_steps, Seed seed) {
    if (n_steps < 1) throw DomainError("integrate_forward: n_steps must be >= 1");
    if (!(t_end > 0.0)) throw DomainError("integrate_forward: t_end must be positive");
    schedule.sigma2(t_end);
    Engine eng = make_engine(seed);
    Vector x = dist.sample(eng);
    Trajectory traj;
    traj.mode = TrajectoryMode::forward_sde;
    traj.seed = seed;
    traj.times.push_back(0.0);
    traj.sigma2.push_back(0.0);
    traj.states.push_back(x);
    std::normal_distribution<double> normal;
    double prev = 0.0;
    for (std::size_t k = 1; k <= n_steps; ++k) {
        const double t = k == n_steps ? t_end : t_end * static_cast<double>(k) / static_cast<double>(n_steps);
        const double s2 = schedule.sigma2(t);
        const double amp = std::sqrt(s2 - prev);
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += amp * normal(eng);
        if (!x.allFinite()) throw IntegrationBlowUp(k, "non-finite state");
        traj.times.push_back(t);
        traj.sigma2.push_back(s2);
        traj.states.push_back(x);
        prev = s2;
    }
    return traj;
}

struct EnsembleResult {
    Matrix terminal;                      // n_trajectories x D
    std::vector<Trajectory> trajectories;  // filled when keep_paths
};

/// Independent reverse trajectories with seeds mix_seed(master_seed, i);
/// aggregation is in index order whatever the thread count.
inline EnsembleResult reverse_ensemble(const DataDistribution& dist, const NoiseSchedule& schedule, double t_start,
                                       double t_end, std::size_t n_steps, TrajectoryMode mode,
                                       std::size_t n_trajectories, Seed master_seed, bool keep_paths = false) {
    detail::check_reverse_args(dist, schedule, t_start, t_end, n_steps, mode);
    ReverseOptions opts;
    opts.record_path = keep_paths;
    auto runs = parallel_map(n_trajectories, [&](std::size_t i) {
        return integrate_reverse(dist, schedule, t_start, t_end, n_steps, mode, mix_seed(master_seed, i), opts);
    });
    EnsembleResult out;
    out.terminal.resize(static_cast<Eigen::Index>(n_trajectories), dist.dim());
    for (std::size_t i = 0; i < n_trajectories; ++i) out.terminal.row(static_cast<Eigen::Index>(i)) = runs[i].states.back();
    if (keep_paths) out.trajectories = std::move(runs);
    return out;
}

/// CSV dump: t, x_1..x_D, trajectory_id, mode.
inline void write_trajectories_csv(std::ostream& out, const std::vector<Trajectory>& trajectories) {
    if (trajectories.empty()) {
        out << "t,trajectory_id,mode\n";
        return;
    }
    const auto d = trajectories.front().states.front().size();
    out << "t";
    for (Eigen::Index i = 1; i <= d; ++i) out << ",x_" << i;
    out << ",trajectory_id,mode\n";
    for (std::size_t id = 0; id < trajectories.size(); ++id) {
        const auto& tr = trajectories[id];
        const std::string mode = to_string(tr.mode);
        for (std::size_t k = 0; k < tr.times.size(); ++k) {
            out << format_double(tr.times[k]);
            for (Eigen::Index i = 0; i < d; ++i) out << ',' << format_double(tr.states[k](i));
            out << ',' << id << ',' << mode << '\n';
        }
    }
}

}  // namespace scorelab
