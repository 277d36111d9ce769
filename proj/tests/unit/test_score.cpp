#include <catch_amalgamated.hpp>

#include "scorelab/score/loss.hpp"
#include "scorelab/score/posterior.hpp"

using namespace scorelab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

DataDistribution five_points() {
    Matrix q(5, 2);
    q << 0, 0, 1, 0, 0, 1, -1, -0.5, 0.7, 0.8;
    return DataDistribution::delta_mixture(q);
}

DataDistribution correlated_gaussian() {
    Matrix c(2, 2);
    c << 2.0, 0.6, 0.6, 0.5;
    Vector m(2);
    m << 0.3, -1.0;
    return DataDistribution::gaussian(m, c);
}

Vector fd_gradient(const DataDistribution& d, const Vector& x, double s2) {
    Vector g(x.size());
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vector a = x, b = x;
        a(i) += h;
        b(i) -= h;
        g(i) = (log_density(d, a, s2) - log_density(d, b, s2)) / (2 * h);
    }
    return g;
}

}  // namespace

TEST_CASE("score is the gradient of log density") {
    for (const auto& d : {five_points(), correlated_gaussian()})
        for (double s2 : {0.05, 0.4, 3.0}) {
            Vector x(2);
            x << 0.37, -0.21;
            const Vector s = score_at(d, x, s2).score;
            CHECK((s - fd_gradient(d, x, s2)).norm() < 1e-6 * std::max(1.0, s.norm()));
        }
}

TEST_CASE("score Jacobian matches finite differences of the score and is symmetric") {
    for (const auto& d : {five_points(), correlated_gaussian()})
        for (double s2 : {0.1, 1.0}) {
            Vector x(2);
            x << -0.4, 0.55;
            const ScoreEval ev = score_at(d, x, s2);
            Matrix fd(2, 2);
            for (int i = 0; i < 2; ++i) {
                Vector a = x, b = x;
                a(i) += 1e-6;
                b(i) -= 1e-6;
                fd.col(i) = (score_at(d, a, s2).score - score_at(d, b, s2).score) / 2e-6;
            }
            CHECK((ev.jacobian - fd).norm() < 1e-5 * std::max(1.0, fd.norm()));
            CHECK((ev.jacobian - ev.jacobian.transpose()).norm() < 1e-12 * std::max(1.0, fd.norm()));
        }
}

TEST_CASE("Tweedie: score equals (E[y|x] - x) / sigma2") {
    const auto d = five_points();
    Vector x(2);
    x << 0.2, 0.9;
    const double s2 = 0.3;
    const auto post = posterior(d, x, s2);
    CHECK_THAT(post.weights.sum(), WithinAbs(1.0, 1e-14));
    CHECK(((post.mean - x) / s2 - score_at(d, x, s2).score).norm() < 1e-12);
    // Jacobian = -I / sigma2 + var / sigma^4
    const Matrix j = -Matrix::Identity(2, 2) / s2 + post.covariance / (s2 * s2);
    CHECK((j - score_at(d, x, s2).jacobian).norm() < 1e-10);
}

TEST_CASE("Gaussian score in closed form") {
    const auto d = correlated_gaussian();
    const auto& g = std::get<GaussianFull>(d.variant());
    Vector x(2);
    x << 1.5, 0.1;
    const double s2 = 0.7;
    const Matrix cov = g.covariance + s2 * Matrix::Identity(2, 2);
    const Vector expected = -cov.inverse() * (x - g.mean);
    CHECK((score_at(d, x, s2).score - expected).norm() < 1e-12);
    CHECK((score_at(d, x, s2).jacobian + cov.inverse()).norm() < 1e-12);
}

TEST_CASE("far from the data the score stays finite and points home") {
    Matrix p(2, 1);
    p << -1.0, 1.0;
    const auto d = DataDistribution::delta_mixture(p);
    const Vector x = Vector::Constant(1, 1e4);
    const auto ev = score_at(d, x, 1e-6);
    REQUIRE(ev.score.allFinite());
    CHECK_THAT(ev.score(0), WithinRel((1.0 - 1e4) / 1e-6, 1e-12));
    CHECK(std::isfinite(log_density(d, x, 1e-6)));
}

TEST_CASE("bad inputs are rejected") {
    const auto d = five_points();
    CHECK_THROWS_AS(score_at(d, Vector::Zero(3), 1.0), DomainError);
    CHECK_THROWS_AS(score_at(d, Vector::Zero(2), 0.0), DomainError);
    CHECK_THROWS_AS(score_at(d, Vector::Constant(2, std::nan("")), 1.0), DomainError);
}

TEST_CASE("exact candidate: zero score-matching loss, L_d equals C_t") {
    const auto d = five_points();
    for (double s2 : {0.1, 1.0}) {
        const auto r = denoising_loss_decomposition(d, s2, exact_denoiser(d), 50000, 3);
        CHECK(r.score_matching.value <= 1e-10);
        CHECK(std::abs(r.denoising.value - r.constant.value) <= 1e-9);
        // C_t in z-units is E tr var(y|x) / sigma2
        CHECK(std::abs(r.constant.value - r.posterior_trace_var.value / s2) <=
              3 * combined_stderr(r.constant.std_error, r.posterior_trace_var.std_error / s2));
    }
}

TEST_CASE("perturbed candidate: L_d - L_sm - C_t vanishes in expectation") {
    const auto d = five_points();
    const auto exact = exact_denoiser(d);
    const DenoiserFn shifted = [&](const Vector& x, double s2) {
        Vector e(2);
        e << 0.3, -0.1;
        return Vector(exact(x, s2) + e + 0.2 * x);
    };
    const auto r = denoising_loss_decomposition(d, 0.5, shifted, 50000, 4);
    CHECK(r.score_matching.value > 0.01);
    CHECK(std::abs(r.residual.value) <= 4 * r.residual.std_error);
}

TEST_CASE("a failing candidate raises EvaluationError") {
    const auto d = five_points();
    const DenoiserFn bad = [](const Vector&, double) { return Vector::Constant(2, std::nan("")); };
    CHECK_THROWS_AS(denoising_loss_decomposition(d, 0.5, bad, 10, 1), EvaluationError);
}
