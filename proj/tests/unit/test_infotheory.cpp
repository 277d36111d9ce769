#include <catch_amalgamated.hpp>

#include <sstream>

#include "oracles.hpp"
#include "scorelab/infotheory/diagnostics.hpp"
#include "scorelab/infotheory/divergence.hpp"
#include "scorelab/infotheory/entropy.hpp"

using namespace scorelab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

DataDistribution pm1() {
    Matrix p(2, 1);
    p << -1.0, 1.0;
    return DataDistribution::delta_mixture(p);
}

DataDistribution triangle() {
    Matrix p(3, 2);
    p << 0, 0, 1, 0, 0, 1.5;
    return DataDistribution::delta_mixture(p);
}

oracle::Mixture to_oracle(const DataDistribution& d) {
    const auto& m = d.mixture();
    oracle::Mixture o;
    for (Eigen::Index i = 0; i < m.points.rows(); ++i) {
        std::vector<double> row;
        for (Eigen::Index j = 0; j < m.points.cols(); ++j) row.push_back(m.points(i, j));
        o.points.push_back(row);
        o.weights.push_back(m.weights(i));
    }
    return o;
}

double floor_for(const DataDistribution& d, double s2) { return 1e-9 * static_cast<double>(d.dim()) / (2.0 * s2); }

}  // namespace

TEST_CASE("estimator names round trip") {
    for (Estimator e : kAllEstimators) CHECK(parse_estimator(to_string(e)) == e);
    CHECK_THROWS_AS(parse_estimator("simpson"), DomainError);
}

TEST_CASE("Gaussian conditional entropy rate equals the derivative of the closed form") {
    Matrix c(3, 3);
    c << 2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 0.4;
    const auto d = DataDistribution::gaussian(Vector::Zero(3), c);
    for (double s2 : {0.01, 0.3, 5.0}) {
        const double h = 1e-5 * s2;
        const double fd =
            (gaussian_conditional_entropy(d, s2 + h) - gaussian_conditional_entropy(d, s2 - h)) / (2 * h);
        CHECK_THAT(gaussian_entropy_rate(d, s2), WithinRel(fd, 1e-6));
    }
}

TEST_CASE("mixture conditional entropy matches quadrature") {
    for (const auto& d : {pm1(), triangle()}) {
        const auto o = to_oracle(d);
        for (double s2 : {0.1, 0.5, 2.0}) {
            const auto est = conditional_entropy(d, s2, 40000, 5);
            CHECK(std::abs(est.value - oracle::conditional_entropy(o, s2)) <= 4 * est.std_error + 1e-12);
        }
    }
}

TEST_CASE("every rate route matches the quadrature derivative on mixtures") {
    for (const auto& d : {pm1(), triangle()}) {
        const auto o = to_oracle(d);
        for (double s2 : {0.05, 0.3, 1.0, 4.0}) {
            const double truth = oracle::conditional_entropy_rate(o, s2);
            const auto p = entropy_point(d, s2, 1.0, 40000, 21);
            for (Estimator e : kAllEstimators) {
                INFO(to_string(e) << " at sigma2 = " << s2 << ": " << p.rate(e).value << " vs " << truth);
                CHECK(std::abs(p.rate(e).value - truth) <= 4 * p.rate(e).std_error + floor_for(d, s2) + 1e-7 * truth);
            }
        }
    }
}

TEST_CASE("schedule nu^2 scales every route") {
    const auto d = pm1();
    const auto a = entropy_point(d, 0.5, 1.0, 5000, 3);
    const auto b = entropy_point(d, 0.5, 2.5, 5000, 3);
    for (Estimator e : kAllEstimators) CHECK_THAT(b.rate(e).value, WithinRel(2.5 * a.rate(e).value, 1e-12));
}

TEST_CASE("Gaussian routes agree with the closed form to rounding") {
    const auto d = DataDistribution::gaussian_subspace(6, 2, 1.5);
    for (double s2 : {0.01, 1.0, 100.0}) {
        const auto p = entropy_point(d, s2, 1.0, 5000, 8);
        const double truth = gaussian_entropy_rate(d, s2);
        for (Estimator e : {Estimator::variance, Estimator::divergence, Estimator::fisher})
            CHECK_THAT(p.rate(e).value, WithinRel(truth, 1e-9));
        CHECK_THAT(p.finite_difference.value, WithinRel(truth, 1e-6));
        CHECK(std::abs(p.norm.value - truth) <= 4 * p.norm.std_error + floor_for(d, s2));
    }
}

TEST_CASE("rate peak of {+-1} sits where the quadrature peak sits") {
    const auto d = pm1();
    const auto grid = sigma2_grid(0.05, 2.0, 40, true);
    const auto prof = entropy_profile(d, NoiseSchedule::constant(), grid, 20000, 2);
    std::size_t best = 0, oracle_best = 0;
    double best_rate = -1, oracle_rate = -1;
    const auto o = to_oracle(d);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (prof.points[k].variance.value > best_rate) {
            best_rate = prof.points[k].variance.value;
            best = k;
        }
        const double r = oracle::conditional_entropy_rate(o, grid[k]);
        if (r > oracle_rate) {
            oracle_rate = r;
            oracle_best = k;
        }
    }
    CHECK(std::abs(static_cast<int>(best) - static_cast<int>(oracle_best)) <= 1);
    CHECK(best > 0);
    CHECK(best + 1 < grid.size());
}

TEST_CASE("profile CSV honours the estimator subset") {
    EntropyProfile prof;
    prof.points.push_back(entropy_point(pm1(), 1.0, 1.0, 200, 1));
    std::ostringstream out;
    write_profile_csv(out, prof, {Estimator::variance, Estimator::finite_difference});
    CHECK(out.str().rfind("sigma2,H_cond,rate_var,rate_fd,stderr_H_cond,stderr_var,stderr_fd\n", 0) == 0);
}

TEST_CASE("entropy estimates do not depend on the thread count") {
    set_thread_count(1);
    const auto a = entropy_point(triangle(), 0.4, 1.0, 9000, 5);
    set_thread_count(3);
    const auto b = entropy_point(triangle(), 0.4, 1.0, 9000, 5);
    set_thread_count(1);
    for (Estimator e : kAllEstimators) CHECK(a.rate(e).value == b.rate(e).value);
}

TEST_CASE("divergence signs and the split div = div1 + delta div") {
    for (const auto& d : {pm1(), triangle()})
        for (double s2 : {0.05, 0.5, 5.0}) {
            const auto r = divergence_report(d, s2, 20000, 6);
            CHECK(r.div.value <= 3 * r.div.std_error);
            CHECK(r.delta_div.value >= -3 * r.delta_div.std_error);
            CHECK_THAT(r.div1, WithinRel(-static_cast<double>(d.dim()) / s2, 1e-15));
            CHECK_THAT(r.div.value, WithinAbs(r.div1 + r.delta_div.value, 1e-9 / s2));
        }
}

TEST_CASE("marginal entropy rate plus conditional rate equals D nu^2 / (2 sigma2)") {
    const auto d = triangle();
    const auto sched = NoiseSchedule::constant(1.3, 100.0);
    for (double t : {0.1, 0.6, 3.0}) {
        const double s2 = sched.sigma2(t);
        const auto m = marginal_entropy_rate(d, sched, t, 40000, 9);
        const auto c = entropy_point(d, sched, t, 40000, 10).finite_difference;
        const double lhs = m.value + c.value - static_cast<double>(d.dim()) * sched.nu2(t) / (2.0 * s2);
        CHECK(std::abs(lhs) <= 4 * combined_stderr(m.std_error, c.std_error) + floor_for(d, s2));
    }
}

TEST_CASE("marginal entropy and divergence of a Gaussian in closed form") {
    Matrix c(2, 2);
    c << 1.0, 0.2, 0.2, 0.5;
    const auto d = DataDistribution::gaussian(Vector::Zero(2), c);
    const double s2 = 0.7;
    const Matrix cov = c + s2 * Matrix::Identity(2, 2);
    const double h = 0.5 * std::log(std::pow(2 * std::numbers::pi * std::numbers::e, 2) * cov.determinant());
    const auto est = marginal_entropy(d, s2, 50000, 4);
    CHECK(std::abs(est.value - h) <= 4 * est.std_error);
    const auto r = divergence_report(d, s2, 1000, 4);
    CHECK_THAT(r.div.value, WithinRel(-cov.inverse().trace(), 1e-12));
}

TEST_CASE("Fisher spectrum of a Gaussian subspace") {
    const double h = 2.0;
    const auto d = DataDistribution::gaussian_subspace(8, 3, h);
    for (double s2 : {0.01, 0.1, 0.4}) {
        const auto f = fisher_spectrum(d, Vector::Ones(8), s2);
        CHECK(count_suppressed(f) == 5);
        CHECK(f.est_manifold_dim == 3);
        // on the subspace: h^2 / (sigma2 (h^2 + sigma2))
        for (Eigen::Index i = 5; i < 8; ++i)
            CHECK_THAT(f.eigenvalues(i), WithinRel(h * h / (s2 * (h * h + s2)), 1e-10));
    }
    CHECK(fisher_spectrum(d, Vector::Ones(8), 100.0).est_manifold_dim == 0);
    CHECK_THROWS_AS(fisher_spectrum(d, Vector::Ones(8), 1.0, {1.0, 0.5}), DomainError);
}

TEST_CASE("Fisher information is the posterior covariance over sigma^4") {
    const auto d = triangle();
    Vector x(2);
    x << 0.3, 0.4;
    const double s2 = 0.2;
    const auto f = fisher_spectrum(d, x, s2);
    const Matrix expected = posterior(d, x, s2).covariance / (s2 * s2);
    CHECK((f.matrix - expected).norm() < 1e-9 * expected.norm());
}

TEST_CASE("active-set heuristic is exact for equidistant orthogonal points") {
    for (int m : {1, 2, 5, 10}) {
        const auto c = active_set_norm_check(m, 0.3, 12);
        CHECK(c.relative_error < 1e-12);
    }
    CHECK_THROWS_AS(active_set_norm_check(5, 0.3, 3), DomainError);
}

TEST_CASE("Fisher-route prefactor is one half") {
    const auto diag = fisher_factor_diagnostic(pm1(), {0.3, 1.0, 3.0}, 50000, 7);
    CHECK(diag.preferred == 0.5);
    CHECK(std::abs(diag.ratio - 0.5) <= 4 * diag.ratio_stderr + 1e-6);
    CHECK(std::abs(diag.ratio - 0.25) > 10 * diag.ratio_stderr);
}

TEST_CASE("maximal bandwidth is the large-h limit") {
    const auto diag = bandwidth_limit_diagnostic(10, 3, 0.5);
    CHECK_THAT(diag.ratio_large, WithinAbs(1.0, 1e-5));
    CHECK(diag.ratio_small < 1e-4);
    CHECK(diag.maximal_limit == "h->inf");
}
