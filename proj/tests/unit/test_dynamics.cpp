#include <catch_amalgamated.hpp>

#include "scorelab/core/parallel.hpp"
#include "scorelab/core/stats.hpp"
#include "scorelab/dynamics/integrate.hpp"
#include "scorelab/dynamics/lyapunov.hpp"
#include "scorelab/model/forward.hpp"

using namespace scorelab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

DataDistribution two_deltas() {
    Matrix p(2, 1);
    p << -1.0, 1.0;
    return DataDistribution::delta_mixture(p);
}

DataDistribution iso_gaussian(double s) {
    Vector m(2);
    m << 0.5, -0.5;
    return DataDistribution::gaussian(m, s * Matrix::Identity(2, 2));
}

// Probability-flow solution for N(m, s I): x - m scales as sqrt(s + sigma2).
Vector ode_exact(const Vector& x0, const Vector& m, double s, double s2_from, double s2_to) {
    return m + (x0 - m) * std::sqrt((s + s2_to) / (s + s2_from));
}

}  // namespace

TEST_CASE("reverse ODE converges to the closed-form Gaussian flow at first order") {
    const double s = 2.0;
    const auto d = iso_gaussian(s);
    const auto sched = NoiseSchedule::constant(1.0, 1000.0);
    Vector x0(2);
    x0 << 7.0, -3.0;
    ReverseOptions opts;
    opts.initial = x0;
    const Vector exact = ode_exact(x0, d.mean(), s, 100.0, 0.01);
    std::vector<double> err;
    for (std::size_t n : {250, 500, 1000, 2000}) {
        const auto tr = integrate_reverse(d, sched, 100.0, 0.01, n, TrajectoryMode::reverse_ode, 0, opts);
        err.push_back((tr.states.back() - exact).norm());
    }
    CHECK(err.back() < 1e-2 * exact.norm());
    for (std::size_t i = 1; i < err.size(); ++i) CHECK_THAT(err[i] / err[i - 1], WithinAbs(0.5, 0.05));
}

TEST_CASE("reverse grid is geometric and the trajectory records every node") {
    const auto g = reverse_sigma2_grid(100.0, 0.01, 4);
    CHECK_THAT(g[1] / g[0], WithinRel(g[3] / g[2], 1e-12));
    const auto tr = integrate_reverse(two_deltas(), NoiseSchedule::constant(), 100.0, 0.01, 50,
                                              TrajectoryMode::reverse_sde, 5);
    CHECK(tr.states.size() == 51);
    for (std::size_t i = 1; i < tr.times.size(); ++i) CHECK(tr.times[i] < tr.times[i - 1]);
}

TEST_CASE("reverse SDE reproduces the Gaussian marginal") {
    const double s = 1.0;
    const auto d = iso_gaussian(s);
    const auto sched = NoiseSchedule::constant(1.0, 1e5);
    const double s2_end = 0.04;
    const auto ens = reverse_ensemble(d, sched, 1e4, s2_end, 1000, TrajectoryMode::reverse_sde, 4000, 77);
    RunningStats var;
    for (Eigen::Index i = 0; i < ens.terminal.rows(); ++i)
        var.add((ens.terminal.row(i).transpose() - d.mean()).squaredNorm() / 2.0);
    // 4 standard errors plus the Euler bias of this step size
    CHECK(std::abs(var.mean() - (s + s2_end)) < 4 * var.stderr_of_mean() + 0.02);
}

TEST_CASE("reverse SDE on two deltas lands near the data, both sides") {
    const auto ens = reverse_ensemble(two_deltas(), NoiseSchedule::constant(), 50.0, 1e-4, 800,
                                      TrajectoryMode::reverse_sde, 400, 3);
    int plus = 0;
    for (Eigen::Index i = 0; i < ens.terminal.rows(); ++i) {
        CHECK(std::abs(std::abs(ens.terminal(i, 0)) - 1.0) < 0.1);
        plus += ens.terminal(i, 0) > 0;
    }
    CHECK(std::abs(plus - 200) < 4 * 10);
}

TEST_CASE("ensembles do not depend on the thread count") {
    const auto run = [](unsigned threads) {
        set_thread_count(threads);
        return reverse_ensemble(two_deltas(), NoiseSchedule::constant(), 10.0, 0.01, 100,
                                TrajectoryMode::reverse_sde, 37, 11);
    };
    const auto a = run(1);
    const auto b = run(4);
    set_thread_count(1);
    CHECK(a.terminal == b.terminal);
}

TEST_CASE("reverse integration argument checks") {
    const auto d = two_deltas();
    const auto s = NoiseSchedule::constant();
    CHECK_THROWS_AS(reverse_ensemble(d, s, 1.0, 2.0, 10, TrajectoryMode::reverse_ode, 1, 0), DomainError);
    CHECK_THROWS_AS(reverse_ensemble(d, s, 1.0, 1e-9, 10, TrajectoryMode::reverse_ode, 1, 0), DomainError);
    CHECK_THROWS_AS(reverse_ensemble(d, s, 1.0, 0.1, 10, TrajectoryMode::forward_sde, 1, 0), DomainError);
}

TEST_CASE("forward path with one step matches sample_forward") {
    const auto d = two_deltas();
    const auto s = NoiseSchedule::constant();
    const auto tr = integrate_forward(d, s, 2.0, 1, 99);
    CHECK(tr.states.back() == sample_forward(d, s, 2.0, 99).x_t);
}

TEST_CASE("Gaussian Lyapunov spectrum is -1 / (s + sigma2)") {
    Matrix c(2, 2);
    c << 3.0, 0.0, 0.0, 0.5;
    const auto d = DataDistribution::gaussian(Vector::Zero(2), c);
    const auto r = lyapunov_at(d, Vector::Ones(2), 0.25);
    CHECK_THAT(r.min_eigenvalue, WithinRel(-1.0 / 0.75, 1e-12));
    CHECK_THAT(r.max_eigenvalue, WithinRel(-1.0 / 3.25, 1e-12));
    CHECK(r.unstable_subspace_dim == 0);
}

TEST_CASE("two deltas at the origin turn unstable below sigma2 = 1") {
    const auto d = two_deltas();
    // lambda = -1/sigma2 + 1/sigma2^2 at x = 0
    for (double s2 : {0.5, 1.0, 2.0})
        CHECK_THAT(lyapunov_at(d, Vector::Zero(1), s2).max_eigenvalue,
                   WithinAbs(-1.0 / s2 + 1.0 / (s2 * s2), 1e-12));
    CHECK(lyapunov_at(d, Vector::Zero(1), 0.5).unstable_subspace_dim == 1);
}

TEST_CASE("separation rate on a Gaussian matches the analytic contraction") {
    const double s = 1.0;
    const auto d = iso_gaussian(s);
    const auto sched = NoiseSchedule::constant();
    Vector dir(2);
    dir << 0.6, 0.8;
    const double t = 2.0, tau = 1.5;
    const auto r = separation_rate(d, sched, Vector::Ones(2), t, dir, tau, {1e-6, 4000});
    const double expected = 0.5 * std::log((s + t - tau) / (s + t)) / tau;
    CHECK_THAT(r.rate, WithinAbs(expected, 1e-3));
    CHECK_THAT(r.rate_refined, WithinAbs(r.rate, 1e-6));
}
