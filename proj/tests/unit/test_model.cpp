#include <catch_amalgamated.hpp>

#include <sstream>

#include "scorelab/core/format.hpp"
#include "scorelab/core/rng.hpp"
#include "scorelab/core/stats.hpp"
#include "scorelab/model/distribution.hpp"
#include "scorelab/model/forward.hpp"
#include "scorelab/model/pointcloud.hpp"
#include "scorelab/model/schedule.hpp"

using namespace scorelab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<NoiseSchedule> schedules() {
    return {NoiseSchedule::constant(1.0, 100.0), NoiseSchedule::constant(0.7, 50.0),
            NoiseSchedule::geometric(0.01, 50.0, 1.0),
            NoiseSchedule::table({0.0, 1.0, 2.5, 4.0}, {0.5, 2.0, 0.0, 1.0})};
}

}  // namespace

TEST_CASE("nu2 is the time derivative of sigma2 for every schedule kind") {
    for (const auto& s : schedules()) {
        for (double f : {0.1, 0.33, 0.5, 0.77, 0.9}) {
            const double t = f * s.t_max();
            const double h = 1e-6 * s.t_max();
            const double fd = (s.sigma2(t + h) - s.sigma2(t - h)) / (2.0 * h);
            CHECK_THAT(s.nu2(t), WithinRel(fd, 1e-5) || WithinAbs(fd, 1e-8));
        }
        CHECK(s.sigma2(0.0) == 0.0);
    }
}

TEST_CASE("time_at inverts sigma2") {
    for (const auto& s : schedules())
        for (double f : {0.01, 0.2, 0.5, 0.99}) {
            const double t = f * s.t_max();
            CHECK_THAT(s.time_at(s.sigma2(t)), WithinRel(t, 1e-9));
        }
    CHECK_THROWS_AS(NoiseSchedule::constant(1.0, 10.0).time_at(11.0), DomainError);
}

TEST_CASE("constant schedule accumulates nu^2 t") {
    const auto s = NoiseSchedule::constant(2.0, 10.0);
    CHECK_THAT(s.sigma2(3.0), WithinRel(12.0, 1e-15));
}

TEST_CASE("schedule constructors reject bad parameters") {
    CHECK_THROWS_AS(NoiseSchedule::constant(0.0), DomainError);
    CHECK_THROWS_AS(NoiseSchedule::geometric(1.0, 0.5), DomainError);
    CHECK_THROWS_AS(NoiseSchedule::table({0.0}, {1.0}), DomainError);
    CHECK_THROWS_AS(NoiseSchedule::table({0.0, 1.0, 2.0}, {1.0, 0.0, 0.0}), DomainError);
    CHECK_THROWS_AS(NoiseSchedule::table({0.5, 1.0}, {1.0, 1.0}), DomainError);
}

TEST_CASE("delta mixture validation") {
    Matrix p(2, 1);
    p << 1.0, 1.0;
    CHECK_THROWS_AS(DataDistribution::delta_mixture(p), DomainError);
    Matrix q(2, 1);
    q << -1.0, 1.0;
    Vector w(2);
    w << 0.5, 0.6;
    CHECK_THROWS_AS(DataDistribution::delta_mixture(q, w), DomainError);
    w << -0.5, 1.5;
    CHECK_THROWS_AS(DataDistribution::delta_mixture(q, w), DomainError);
    CHECK_NOTHROW(DataDistribution::delta_mixture(q));
}

TEST_CASE("Gaussian validation") {
    Matrix c(2, 2);
    c << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(DataDistribution::gaussian(Vector::Zero(2), c), DomainError);
    Matrix b(3, 2);
    b << 1, 0, 1, 0, 0, 1;
    CHECK_THROWS_AS(DataDistribution::gaussian_subspace(b, 1.0), DomainError);
    CHECK_THROWS_AS(DataDistribution::gaussian_subspace(4, 2, 0.0), DomainError);
}

TEST_CASE("mixture sampling follows the weights") {
    Matrix p(3, 1);
    p << 0.0, 1.0, 2.0;
    Vector w(3);
    w << 0.2, 0.5, 0.3;
    const auto d = DataDistribution::delta_mixture(p, w);
    Engine eng = make_engine(42);
    std::array<int, 3> counts{};
    const int n = 100000;
    for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(d.sample(eng)(0))];
    for (int j = 0; j < 3; ++j) {
        const double se = std::sqrt(w(j) * (1 - w(j)) / n);
        CHECK(std::abs(counts[static_cast<std::size_t>(j)] / double(n) - w(j)) < 4 * se);
    }
}

TEST_CASE("Gaussian subspace samples live on the subspace with variance h^2") {
    const auto d = DataDistribution::gaussian_subspace(5, 2, 3.0);
    Engine eng = make_engine(1);
    RunningStats on, off;
    for (int i = 0; i < 20000; ++i) {
        const Vector y = d.sample(eng);
        on.add(y(0) * y(0));
        off.add(y.tail(3).squaredNorm());
    }
    CHECK(off.mean() < 1e-20);
    CHECK(std::abs(on.mean() - 9.0) < 4 * on.stderr_of_mean());
}

TEST_CASE("forward marginal has variance data + sigma2") {
    Matrix p(2, 1);
    p << -1.0, 1.0;
    const auto d = DataDistribution::delta_mixture(p);
    const auto s = NoiseSchedule::constant(1.0, 10.0);
    RunningStats st;
    for (std::uint64_t i = 0; i < 20000; ++i) {
        const auto f = sample_forward(d, s, 0.5, mix_seed(9, i));
        CHECK((f.x_t - (f.y + std::sqrt(0.5) * f.z)).norm() < 1e-14);
        st.add(f.x_t(0) * f.x_t(0));
    }
    CHECK(std::abs(st.mean() - 1.5) < 4 * st.stderr_of_mean());
}

TEST_CASE("substreams are deterministic and distinct") {
    CHECK(substream(1, "a", 0) == substream(1, "a", 0));
    CHECK(substream(1, "a", 0) != substream(1, "a", 1));
    CHECK(substream(1, "a", 0) != substream(1, "b", 0));
    CHECK(substream(1, "a", 0) != substream(2, "a", 0));
}

TEST_CASE("format_double round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 123456.789}) CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("point cloud CSV with header and weights") {
    std::istringstream in("# comment\nx,y,weight\n0,0,1\n1,0,3\n");
    const auto d = parse_pointcloud_csv(in);
    REQUIRE(d.dim() == 2);
    CHECK_THAT(d.mixture().weights(1), WithinRel(0.75, 1e-12));
}

TEST_CASE("point cloud CSV errors carry the row") {
    std::istringstream ragged("0,0\n1\n");
    try {
        parse_pointcloud_csv(ragged);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.row() == 2);
    }
    std::istringstream bad("0,0\n1,abc\n");
    CHECK_THROWS_AS(parse_pointcloud_csv(bad), ParseError);
    std::istringstream empty("# nothing\n");
    CHECK_THROWS_AS(parse_pointcloud_csv(empty), ParseError);
    std::istringstream dup("1,2\n1,2\n");
    CHECK_THROWS_AS(parse_pointcloud_csv(dup), ParseError);
}

TEST_CASE("point cloud JSON") {
    const auto d = parse_pointcloud_json(nlohmann::json::parse(R"({"points": [[0], [2]], "weights": [1, 1]})"));
    CHECK(d.mixture().points.rows() == 2);
    CHECK_THROWS_AS(parse_pointcloud_json(nlohmann::json::parse(R"({"points": [[0], [1, 2]]})")), ParseError);
    CHECK_THROWS_AS(parse_pointcloud_json(nlohmann::json::parse(R"({"pts": []})")), ParseError);
}
