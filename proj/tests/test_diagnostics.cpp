#include <doctest.h>

#include <cmath>

#include "liemidpoint/diagnostics.hpp"
#include "liemidpoint/models.hpp"
#include "oracles.hpp"

using namespace lmp;

namespace {

// Forward relations between Euler rates and the body angular velocity.
Vec3 body_omega(const EulerRates& r, const EulerAngles& a) {
    const double st = std::sin(a.theta), ct = std::cos(a.theta);
    const double sp = std::sin(a.psi), cp = std::cos(a.psi);
    return {r.omega_phi * st * sp + r.omega_theta * cp,
            r.omega_phi * st * cp - r.omega_theta * sp,
            r.omega_phi * ct + r.omega_psi};
}

EulerAngles random_angles(oracles::TestRng& rng) {
    return {rng.uniform(0.0, 2 * M_PI), rng.uniform(0.2, M_PI - 0.2), rng.uniform(0.0, 2 * M_PI)};
}

} // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("orbit radius") {
    CHECK(orbit_radius({0, 0, 1}) == 1.0);
    CHECK(orbit_radius({-0.5878, 0, 0.8090}) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(orbit_radius({3, 4, 0}) == 5.0);
}

TEST_CASE("spatial momentum") {
    CHECK(spatial_momentum(Rotation::identity(), {1, 2, 3}) == Vec3{1, 2, 3});
    Mat3 quarter;
    quarter.a = {0, -1, 0, 1, 0, 0, 0, 0, 1};
    CHECK(norm(spatial_momentum(Rotation(quarter), {1, 0, 0}) - Vec3{0, 1, 0}) <= 1e-15);
}

TEST_CASE("heavy-top momentum map equals the Casimir expression") {
    CHECK(heavytop_momentum_map(Rotation::identity(), {0, 0, 1}) == 1.0);

    oracles::TestRng rng(60);
    for (int i = 0; i < 100; ++i) {
        const Rotation r = rng.rotation(2.0);
        const Vec3 pi = rng.vec3(-2, 2);
        const Vec3 gamma = r.matrix().transposed() * Vec3{0, 0, 1};
        CHECK(std::fabs(heavytop_momentum_map(r, pi) - dot(pi, gamma)) <= 1e-15 * (1 + norm(pi)));
    }
}

TEST_CASE("heavy-top Casimirs") {
    CHECK(casimirs_ht({0, 0, 1}, {0, 0, 1}) == std::pair<double, double>{1.0, 1.0});
    CHECK(casimirs_ht({1, 0, 0}, {0, 0, 1}) == std::pair<double, double>{1.0, 0.0});
}

TEST_CASE("euler extraction round trip") {
    const EulerAngles a{0.3, 0.5, 1.0};
    const EulerAngles back = euler_from_rotation(rotation_from_euler(a));
    CHECK(back.phi == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(back.theta == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(back.psi == doctest::Approx(1.0).epsilon(1e-12));

    oracles::TestRng rng(61);
    for (int i = 0; i < 100; ++i) {
        const EulerAngles an = random_angles(rng);
        const EulerAngles out = euler_from_rotation(rotation_from_euler(an));
        CHECK(std::fabs(out.phi - an.phi) <= 1e-10);
        CHECK(std::fabs(out.theta - an.theta) <= 1e-10);
        CHECK(std::fabs(out.psi - an.psi) <= 1e-10);
    }
}

TEST_CASE("the tilted release matrix has theta = 0.15 pi") {
    Mat3 tilt;
    tilt.a = {1, 0, 0, 0, 0.8910065241883679, 0.45399049973954675,
              0, -0.45399049973954675, 0.8910065241883679};
    const EulerAngles an = euler_from_rotation(Rotation(tilt));
    CHECK(an.theta == doctest::Approx(0.15 * M_PI).epsilon(1e-12));
    // consistency: the extracted triple reproduces the matrix
    CHECK(norm_max(rotation_from_euler(an).matrix() - tilt) <= 1e-12);
}

TEST_CASE("euler extraction rejects rotations that fix the z axis") {
    CHECK_THROWS_AS((void)euler_from_rotation(Rotation::identity()), DomainError);
    Mat3 quarter;
    quarter.a = {0, -1, 0, 1, 0, 0, 0, 0, 1};
    CHECK_THROWS_AS((void)euler_from_rotation(Rotation(quarter)), DomainError);
}

TEST_CASE("euler rates invert the forward relations") {
    const Mat3 inertia = Mat3::diagonal(0.1, 0.1, 1.0);
    oracles::TestRng rng(62);
    for (int i = 0; i < 100; ++i) {
        const EulerAngles an = random_angles(rng);
        const EulerRates rates{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const Vec3 pi = inertia * body_omega(rates, an);
        const EulerRates out = euler_rates(pi, inertia, an);
        CHECK(std::fabs(out.omega_phi - rates.omega_phi) <= 1e-10);
        CHECK(std::fabs(out.omega_theta - rates.omega_theta) <= 1e-10);
        CHECK(std::fabs(out.omega_psi - rates.omega_psi) <= 1e-10);
    }

    // pure spin about the body z axis at theta = pi/2
    const double c = 0.7;
    const EulerRates spin = euler_rates(inertia * Vec3{0, 0, c}, inertia, {0.1, M_PI / 2, 0.2});
    CHECK(std::fabs(spin.omega_phi) <= 1e-14);
    CHECK(std::fabs(spin.omega_theta) <= 1e-14);
    CHECK(spin.omega_psi == doctest::Approx(c).epsilon(1e-12));

    const EulerRates zero = euler_rates({0, 0, 0}, inertia, {0.1, 1.0, 0.2});
    CHECK(zero.omega_phi == 0.0);
    CHECK(zero.omega_theta == 0.0);
    CHECK(zero.omega_psi == 0.0);

    CHECK_THROWS_AS((void)euler_rates({0, 0, 1}, inertia, {0.0, 1e-8, 0.0}), DomainError);
}

TEST_CASE("conjugate momenta") {
    const Mat3 inertia = Mat3::diagonal(0.1, 0.1, 1.0);

    // omega_phi = 1, omega_psi = 0 at theta = pi/2 (psi = pi/2 puts the body
    // velocity on the x axis): p_phi = I1, p_psi = 0.
    const EulerAngles an{0.0, M_PI / 2, M_PI / 2};
    const Vec3 pi = inertia * body_omega({1.0, 0.0, 0.0}, an);
    const auto [p_phi, p_psi] = conjugate_momenta(pi, inertia, an);
    CHECK(p_phi == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(std::fabs(p_psi) <= 1e-14);

    oracles::TestRng rng(63);
    for (int i = 0; i < 100; ++i) {
        const EulerAngles angles = random_angles(rng);
        const Vec3 mom = inertia * body_omega({rng.uniform(-2, 2), rng.uniform(-2, 2),
                                               rng.uniform(-2, 2)},
                                              angles);
        const auto [pf, ps] = conjugate_momenta(mom, inertia, angles);

        // p_psi = Pi_z and p_phi = (R Pi)_z for the symmetric top
        CHECK(std::fabs(ps - mom.z) <= 1e-12);
        const Rotation r = rotation_from_euler(angles);
        CHECK(std::fabs(pf - heavytop_momentum_map(r, mom)) <= 1e-10);

        // reconstructing the rates from (p_phi, p_psi, theta)
        const double st = std::sin(angles.theta), ct = std::cos(angles.theta);
        const double wf = (pf - ps * ct) / (0.1 * st * st);
        const double wp = ps / 1.0 - (pf - ps * ct) * ct / (0.1 * st * st);
        const EulerRates rates = euler_rates(mom, inertia, angles);
        CHECK(std::fabs(wf - rates.omega_phi) <= 1e-10 * (1 + std::fabs(wf)));
        CHECK(std::fabs(wp - rates.omega_psi) <= 1e-10 * (1 + std::fabs(wp)));
    }
}

TEST_CASE("effective potential values") {
    CHECK(effective_potential(M_PI / 2, 1.0, 1.0, 0.1, 0.98) == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(effective_potential(M_PI / 3, 1.0, 1.0, 0.1, 0.98) ==
          doctest::Approx(2.1566666666666666667).epsilon(1e-14));
}

TEST_CASE("nutation bounds bracket the minimizer") {
    const double p_phi = 0.891006524188368; // p_psi cos(theta0) at release
    const double p_psi = 1.0;
    const double i1 = 0.1;
    const double mgl = 0.98;

    // Locate min V by scanning, then check the degenerate and generic cases.
    double theta_min = 0.0, v_min = 1e300;
    for (int i = 1; i < 20000; ++i) {
        const double th = M_PI * i / 20000.0;
        const double v = effective_potential(th, p_phi, p_psi, i1, mgl);
        if (v < v_min) {
            v_min = v;
            theta_min = th;
        }
    }

    const auto [d1, d2] = nutation_bounds(v_min, p_phi, p_psi, i1, mgl);
    CHECK(std::fabs(d1 - theta_min) <= 1e-3);
    CHECK(std::fabs(d2 - theta_min) <= 1e-3);

    const double e_prime = v_min + 0.05;
    const auto [t1, t2] = nutation_bounds(e_prime, p_phi, p_psi, i1, mgl);
    CHECK(t1 < theta_min);
    CHECK(t2 > theta_min);
    CHECK(std::fabs(effective_potential(t1, p_phi, p_psi, i1, mgl) - e_prime) <= 1e-9);
    CHECK(std::fabs(effective_potential(t2, p_phi, p_psi, i1, mgl) - e_prime) <= 1e-9);

    CHECK_THROWS_AS((void)nutation_bounds(v_min - 1.0, p_phi, p_psi, i1, mgl), DomainError);
}

TEST_CASE("drift report") {
    const std::vector<double> constant(100, 3.5);
    const DriftEntry c = drift_entry("const", constant);
    CHECK(c.initial == 3.5);
    CHECK(c.max_abs_deviation == 0.0);

    std::vector<double> spike(100, 1.0);
    spike[42] = 1.25;
    const DriftEntry s = drift_entry("spike", spike);
    CHECK(s.max_abs_deviation == 0.25);
    CHECK(s.step_of_max == 42);

    CHECK_THROWS_AS((void)drift_entry("empty", std::vector<double>{}), DomainError);

    const DriftReport report = drift_report({{"const", constant}, {"spike", spike}});
    CHECK(report.find("spike") != nullptr);
    CHECK(report.find("missing") == nullptr);
    CHECK(report.to_json().find("\"spike\"") != std::string::npos);
}

} // TEST_SUITE
