#include <doctest.h>

#include <cmath>
#include <sstream>

#include "liemidpoint/convergence.hpp"
#include "oracles.hpp"

using namespace lmp;

namespace {

ConvergenceSetup small_setup() {
    ConvergenceSetup s;
    s.dt_fine = 0.005;
    s.factors = {2, 4, 8};
    s.horizon = 0.64;
    s.samples = 8;
    s.seed = 17;
    return s;
}

} // namespace

TEST_SUITE("convergence") {

TEST_CASE("factor one reproduces the reference exactly") {
    const RigidBody body = RigidBody::from_diagonal(1, 2, 3);
    ConvergenceSetup s = small_setup();
    s.factors = {1};
    const ErrorTable table =
        coupled_errors(body, {NoiseHamiltonian::linear_momentum({0.02, 0, 0})},
                       {-0.5878, 0.0, 0.8090}, s);
    REQUIRE(table.rows.size() == 1);
    CHECK(table.rows[0].rms_error == 0.0);
}

TEST_CASE("zero noise reproduces the deterministic second-order rate") {
    const RigidBody body = RigidBody::from_diagonal(1, 2, 3);
    ConvergenceSetup s = small_setup();
    s.factors = {2, 4, 8, 16};
    s.horizon = 2.56;
    s.samples = 1; // deterministic: one sample suffices
    const ErrorTable table = coupled_errors(body, {}, {-0.5878, 0.0, 0.8090}, s);
    const OrderFit fit = estimate_order(table);
    CHECK(fit.slope >= 1.8);
    CHECK(fit.slope <= 2.2);
    CHECK(fit.r_squared >= 0.99);
}

TEST_CASE("error table is reproducible bit for bit") {
    const RigidBody body = RigidBody::from_diagonal(1, 2, 3);
    const std::vector<NoiseHamiltonian> noise{NoiseHamiltonian::linear_momentum({0.02, 0, 0})};
    const ErrorTable a = coupled_errors(body, noise, {-0.5878, 0.0, 0.8090}, small_setup());
    const ErrorTable b = coupled_errors(body, noise, {-0.5878, 0.0, 0.8090}, small_setup());
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].rms_error == b.rows[i].rms_error);
    }

    ConvergenceSetup threaded = small_setup();
    threaded.workers = 4;
    const ErrorTable c = coupled_errors(body, noise, {-0.5878, 0.0, 0.8090}, threaded);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].rms_error == c.rows[i].rms_error);
    }
}

TEST_CASE("setup validation") {
    const RigidBody body = RigidBody::from_diagonal(1, 2, 3);
    const Vec3 mu0{-0.5878, 0.0, 0.8090};

    ConvergenceSetup bad_factor = small_setup();
    bad_factor.factors = {3}; // 0.64 / 0.005 = 128 steps, not divisible by 3
    CHECK_THROWS_AS((void)coupled_errors(body, {}, mu0, bad_factor), ConfigError);

    ConvergenceSetup bad_horizon = small_setup();
    bad_horizon.horizon = 0.6401;
    CHECK_THROWS_AS((void)coupled_errors(body, {}, mu0, bad_horizon), ConfigError);

    // Guard violation at the coarsest rung is a configuration error.
    ConvergenceSetup coarse = small_setup();
    coarse.dt_fine = 0.04;
    coarse.horizon = 40.96;
    coarse.factors = {16};
    coarse.samples = 1;
    CHECK_THROWS_AS((void)coupled_errors(body, {}, mu0, coarse), ConfigError);
}

TEST_CASE("order estimation on synthetic tables") {
    ErrorTable linear;
    linear.dt_reference = 0.001;
    for (double dt : {0.002, 0.004, 0.008, 0.016}) {
        linear.rows.push_back({dt, 0.37 * dt, 10});
    }
    const OrderFit f1 = estimate_order(linear);
    CHECK(f1.slope == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f1.r_squared == doctest::Approx(1.0).epsilon(1e-12));

    ErrorTable half;
    for (double dt : {0.002, 0.004, 0.008, 0.016}) {
        half.rows.push_back({dt, 0.1 * std::sqrt(dt), 10});
    }
    const OrderFit f2 = estimate_order(half);
    CHECK(f2.slope == doctest::Approx(0.5).epsilon(1e-12));

    // multiplicative jitter around slope 1
    oracles::TestRng rng(70);
    ErrorTable noisy;
    for (double dt : {0.002, 0.004, 0.008, 0.016, 0.032}) {
        noisy.rows.push_back({dt, 0.37 * dt * rng.uniform(0.95, 1.05), 10});
    }
    const OrderFit f3 = estimate_order(noisy);
    CHECK(f3.slope >= 0.9);
    CHECK(f3.slope <= 1.1);

    // zero rows are excluded; too few rows is an error
    ErrorTable degenerate;
    degenerate.rows.push_back({0.002, 0.0, 10});
    degenerate.rows.push_back({0.004, 0.001, 10});
    CHECK_THROWS_AS((void)estimate_order(degenerate), DomainError);

    degenerate.rows.push_back({0.008, 0.002, 10});
    const OrderFit f4 = estimate_order(degenerate);
    CHECK(f4.rows_excluded == 1);
    CHECK(f4.rows_used == 2);
}

TEST_CASE("csv serialization") {
    ErrorTable table;
    table.rows.push_back({0.01, 0.5, 100});
    table.rows.push_back({0.02, 1.0, 100});
    std::ostringstream os;
    write_csv(table, os);
    CHECK(os.str() == "dt,rms_error,samples\n0.01,0.5,100\n0.02,1,100\n");
}

TEST_CASE("heavy-top variant couples on the momentum component") {
    const HeavyTop top(Mat3::diagonal(0.1, 0.1, 1.0), 0.1, 9.8, {0, 0, 1});
    ConvergenceSetup s = small_setup();
    s.factors = {1, 2};
    s.samples = 4;
    const ErrorTable table = coupled_errors(top, {NoiseHamiltonian::momentum_z(0.1)}, {0, 0, 1},
                                            {0.0, 0.45399049973954675, 0.8910065241883679}, s);
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0].rms_error == 0.0);
    CHECK(table.rows[1].rms_error > 0.0);
}

} // TEST_SUITE
