#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "liemidpoint/noise.hpp"

using namespace lmp;

TEST_SUITE("noise") {

TEST_CASE("generation is deterministic in (seed, shape, dt)") {
    const WienerGrid a = WienerGrid::generate(1234, 64, 3, 0.01);
    const WienerGrid b = WienerGrid::generate(1234, 64, 3, 0.01);
    CHECK(a.increments() == b.increments());

    const WienerGrid c = WienerGrid::generate(1235, 64, 3, 0.01);
    CHECK(a.increments() != c.increments());
}

TEST_CASE("extending the grid preserves the prefix per channel") {
    const WienerGrid small = WienerGrid::generate(99, 32, 2, 0.02);
    const WienerGrid big = WienerGrid::generate(99, 64, 2, 0.02);
    for (std::int64_t k = 0; k < 32; ++k) {
        for (int i = 0; i < 2; ++i) CHECK(small.at(k, i) == big.at(k, i));
    }
}

TEST_CASE("sample moments match N(0, dt)") {
    const double dt = 0.01;
    const WienerGrid grid = WienerGrid::generate(2024, 1000, 1000, dt);
    const double n = 1e6;
    double mean = 0.0;
    for (double v : grid.increments()) mean += v;
    mean /= n;
    CHECK(std::fabs(mean) <= 4.0 * std::sqrt(dt / n));

    double var = 0.0;
    for (double v : grid.increments()) var += (v - mean) * (v - mean);
    var /= n - 1;
    CHECK(var == doctest::Approx(dt).epsilon(0.05));
}

TEST_CASE("generation rejects degenerate shapes") {
    CHECK_THROWS_AS(WienerGrid::generate(1, 0, 1, 0.01), DomainError);
    CHECK_THROWS_AS(WienerGrid::generate(1, 8, 0, 0.01), DomainError);
    CHECK_THROWS_AS(WienerGrid::generate(1, 8, 1, 0.0), DomainError);
    CHECK_THROWS_AS(WienerGrid::generate(1, 8, 1, -1.0), DomainError);
}

TEST_CASE("default truncation level") {
    CHECK(default_level(0.01).d == doctest::Approx(0.429193205257869448).epsilon(1e-14));
    CHECK(default_level(std::exp(-1.0)).d == doctest::Approx(1.213061319425266847).epsilon(1e-14));
    CHECK(default_level(0.5).d > 0.0);
    CHECK_THROWS_AS(default_level(1.0), DomainError);
    CHECK_THROWS_AS(default_level(0.0), DomainError);
    CHECK_THROWS_AS(default_level(-0.1), DomainError);
}

TEST_CASE("truncation clips to [-d, d]") {
    const TruncationLevel level{0.43};
    CHECK(truncate(0.1, level) == 0.1);
    CHECK(truncate(0.9, level) == 0.43);
    CHECK(truncate(-0.9, level) == -0.43);
    CHECK(truncate(0.43, level) == 0.43);
}

TEST_CASE("coarsening sums fine increments") {
    // column [a, b, c, d] with m = 2 -> [a+b, c+d]
    const std::vector<double> inc{0.1, -0.2, 0.3, 0.05};
    const WienerGrid grid(0.25, 4, 1, inc);
    const WienerGrid two = grid.coarsen(2);
    CHECK(two.steps() == 2);
    CHECK(two.dt() == 0.5);
    CHECK(two.at(0, 0) == 0.1 + -0.2);
    CHECK(two.at(1, 0) == 0.3 + 0.05);

    const WienerGrid one = grid.coarsen(1);
    CHECK(one.increments() == grid.increments());
    CHECK(one.dt() == grid.dt());

    const WienerGrid all = grid.coarsen(4);
    CHECK(all.steps() == 1);
    CHECK(all.at(0, 0) == grid.channel_total(0));

    CHECK_THROWS_AS(grid.coarsen(3), DomainError);
    CHECK_THROWS_AS(grid.coarsen(0), DomainError);
}

TEST_CASE("coarsening preserves channel totals bit-exactly on dyadic ladders") {
    const WienerGrid grid = WienerGrid::generate(7, 1024, 3, 0.005);
    for (const std::int64_t m : {2, 4, 8, 16, 64, 1024}) {
        const WienerGrid coarse = grid.coarsen(m);
        for (int i = 0; i < 3; ++i) {
            CHECK(coarse.channel_total(i) == grid.channel_total(i));
        }
    }
}

TEST_CASE("truncated increments keep the moment bounds") {
    const double dt = 0.01;
    const TruncationLevel level = default_level(dt);
    const WienerGrid grid = WienerGrid::generate(5150, 1000, 1000, dt);
    const double n = 1e6;

    double m1 = 0, m2 = 0, m3 = 0, m4 = 0;
    for (double v : grid.increments()) {
        const double w = truncate(v, level);
        CHECK(std::fabs(w) <= level.d);
        m1 += w;
        m2 += w * w;
        m3 += w * w * w;
        m4 += w * w * w * w;
    }
    m1 /= n;
    m2 /= n;
    m3 /= n;
    m4 /= n;

    // Odd moments vanish; standard errors of the estimators at N(0, dt):
    // sd(w) = sqrt(dt), sd(w^3) ~ sqrt(15 dt^3).
    CHECK(std::fabs(m1) <= 5.0 * std::sqrt(dt / n));
    CHECK(std::fabs(m3) <= 5.0 * std::sqrt(15.0 * dt * dt * dt / n));

    // Even moments are bounded by the Gaussian ones, up to sampling error:
    // E[w^2] <= dt, E[w^4] <= 3 dt^2; sd(w^2) = sqrt(2) dt, sd(w^4) = sqrt(96) dt^2.
    CHECK(m2 <= dt + 5.0 * std::sqrt(2.0) * dt / std::sqrt(n));
    CHECK(m4 <= 3.0 * dt * dt + 5.0 * std::sqrt(96.0) * dt * dt / std::sqrt(n));
}

TEST_CASE("inverse normal CDF reference values") {
    CHECK(rng::normal_quantile(0.5) == 0.0);
    CHECK(rng::normal_quantile(0.975) == doctest::Approx(1.959963984540054236).epsilon(1e-14));
    CHECK(rng::normal_quantile(0.001) == doctest::Approx(-3.090232306167813542).epsilon(1e-14));
    CHECK(rng::normal_quantile(0.25) == doctest::Approx(-0.674489750196081743).epsilon(1e-14));
    CHECK(rng::normal_quantile(1e-7) == doctest::Approx(-5.199337582192817).epsilon(1e-12));
    CHECK(rng::normal_quantile(1e-20) == doctest::Approx(-9.262340093185976).epsilon(1e-12));
    // antisymmetry (p near 1 is limited by the float spacing of 1 - p, so
    // spot checks stay in the well-conditioned range)
    for (double p : {0.41, 0.1, 0.004, 1e-4}) {
        CHECK(rng::normal_quantile(p) == doctest::Approx(-rng::normal_quantile(1.0 - p)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(rng::normal_quantile(0.0), DomainError);
    CHECK_THROWS_AS(rng::normal_quantile(1.0), DomainError);
}

TEST_CASE("stream derivation separates trajectories") {
    const std::uint64_t seed = 99;
    const WienerGrid g0 = WienerGrid::generate(rng::derive_stream(seed, 0), 16, 1, 0.01);
    const WienerGrid g1 = WienerGrid::generate(rng::derive_stream(seed, 1), 16, 1, 0.01);
    CHECK(g0.increments() != g1.increments());
}

TEST_CASE("grid CSV export") {
    const WienerGrid grid(0.5, 2, 2, {1.0, 2.0, 0.25, -0.125});
    std::ostringstream os;
    grid.write_csv(os);
    CHECK(os.str() == "1,2\n0.25,-0.125\n");
}

} // TEST_SUITE
