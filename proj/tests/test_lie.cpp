#include <doctest.h>

#include <cmath>

#include "liemidpoint/lie.hpp"
#include "oracles.hpp"

using namespace lmp;

namespace {
double max_diff(const Mat3& a, const Mat3& b) { return norm_max(a - b); }
} // namespace

TEST_SUITE("lie") {

TEST_CASE("hat produces the cross-product matrix") {
    const Mat3 hz = hat({0, 0, 1});
    Mat3 expect;
    expect.a = {0, -1, 0, 1, 0, 0, 0, 0, 0};
    CHECK(max_diff(hz, expect) == 0.0);

    CHECK(norm_max(hat({0, 0, 0})) == 0.0);

    const Mat3 h123 = hat({1, 2, 3});
    Mat3 expect123;
    expect123.a = {0, -3, 2, 3, 0, -1, -2, 1, 0};
    CHECK(max_diff(h123, expect123) == 0.0);

    // hat(v) w = v x w on random inputs
    oracles::TestRng rng(11);
    for (int i = 0; i < 100; ++i) {
        const Vec3 v = rng.vec3(-5, 5);
        const Vec3 w = rng.vec3(-5, 5);
        CHECK(norm(hat(v) * w - cross(v, w)) == 0.0);
    }
}

TEST_CASE("vee inverts hat exactly and rejects non-skew input") {
    CHECK(vee(hat({0, 0, 1})) == Vec3{0, 0, 1});
    CHECK(vee(Mat3{}) == Vec3{0, 0, 0});
    CHECK(vee(hat({1, 2, 3})) == Vec3{1, 2, 3});

    oracles::TestRng rng(12);
    for (int i = 0; i < 100; ++i) {
        const Vec3 v = rng.vec3(-10, 10);
        CHECK(vee(hat(v)) == v);
    }

    Mat3 not_skew = hat({1, 2, 3});
    not_skew(0, 1) += 1e-6;
    CHECK_THROWS_AS(vee(not_skew), DomainError);
}

TEST_CASE("cayley maps zero to the identity and (0,0,2) to a quarter turn") {
    CHECK(max_diff(cayley({0, 0, 0}).matrix(), Mat3::identity()) == 0.0);

    Mat3 quarter;
    quarter.a = {0, -1, 0, 1, 0, 0, 0, 0, 1};
    CHECK(max_diff(cayley({0, 0, 2}).matrix(), quarter) <= 1e-15);
}

TEST_CASE("cayley(-v) is the transpose of cayley(v)") {
    oracles::TestRng rng(13);
    for (int i = 0; i < 200; ++i) {
        const Vec3 v = rng.vec3(-4, 4);
        const Mat3 a = cayley(-1.0 * v).matrix();
        const Mat3 b = cayley(v).matrix().transposed();
        CHECK(max_diff(a, b) <= 1e-13);
    }
}

TEST_CASE("cayley keeps the rotation invariants") {
    oracles::TestRng rng(14);
    for (int i = 0; i < 200; ++i) {
        const Rotation r = cayley(rng.vec3(-8, 8)); // construction re-validates
        CHECK(orthogonality_defect(r.matrix()) <= 1e-13);
        CHECK(det(r.matrix()) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("cayley_inv inverts cayley") {
    CHECK(norm(cayley_inv(Rotation::identity())) == 0.0);

    Mat3 quarter;
    quarter.a = {0, -1, 0, 1, 0, 0, 0, 0, 1};
    CHECK(norm(cayley_inv(Rotation(quarter)) - Vec3{0, 0, 2}) <= 1e-15);

    oracles::TestRng rng(15);
    for (int i = 0; i < 100; ++i) {
        Vec3 dir = rng.vec3(-1, 1);
        const Vec3 v = (rng.uniform(0.0, 10.0) / std::max(norm(dir), 1e-9)) * dir;
        const Vec3 back = cayley_inv(cayley(v));
        CHECK(norm(back - v) <= 1e-11 * std::max(1.0, norm(v)));
    }
}

TEST_CASE("cayley_inv rejects rotations at angle pi") {
    const Rotation half_turn(Mat3::diagonal(-1.0, -1.0, 1.0));
    CHECK_THROWS_AS((void)cayley_inv(half_turn), DomainError);
}

TEST_CASE("dcayinv_dual hand values") {
    oracles::TestRng rng(16);
    for (int i = 0; i < 20; ++i) {
        const Vec3 xi = rng.vec3(-5, 5);
        const Vec3 mu = rng.vec3(-5, 5);
        CHECK(dcayinv_dual(xi, 0.0, mu) == mu);
    }
    const Vec3 out = dcayinv_dual({1, 0, 0}, 0.1, {0, 1, 0});
    CHECK(out.x == doctest::Approx(0.0));
    CHECK(out.y == doctest::Approx(1.0));
    CHECK(out.z == doctest::Approx(0.05));
}

TEST_CASE("base-change identity of the dual trivialized derivative") {
    // Ad*_{tau(dt xi)} [d_{dt xi} tau^{-1}]* mu = [d_{-dt xi} tau^{-1}]* mu
    oracles::TestRng rng(17);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Vec3 xi = rng.vec3(-2, 2);
        const Vec3 mu = rng.vec3(-3, 3);
        const double dt = rng.uniform(1e-4, 0.5);
        const Vec3 lhs = Ad_star(cayley(dt * xi), dcayinv_dual(xi, dt, mu));
        const Vec3 rhs = dcayinv_dual(-1.0 * xi, dt, mu);
        worst = std::max(worst, norm(lhs - rhs));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("ad_star satisfies its defining pairing") {
    CHECK(ad_star({1, 0, 0}, {0, 1, 0}) == Vec3{0, 0, -1});
    CHECK(ad_star({2, 2, 2}, {1, 1, 1}) == Vec3{0, 0, 0});
    CHECK(ad_star({0, 0, 0}, {1, 2, 3}) == Vec3{0, 0, 0});

    oracles::TestRng rng(18);
    const Vec3 basis[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (int i = 0; i < 100; ++i) {
        const Vec3 xi = rng.vec3(-3, 3);
        const Vec3 mu = rng.vec3(-3, 3);
        for (const Vec3& eta : basis) {
            // <ad*_xi mu, eta> = mu . (xi x eta)
            CHECK(dot(ad_star(xi, mu), eta) ==
                  doctest::Approx(dot(mu, cross(xi, eta))).epsilon(1e-14));
        }
    }
}

TEST_CASE("Ad_star is R^T, preserves norms, and reverses composition") {
    CHECK(Ad_star(Rotation::identity(), {1, 2, 3}) == Vec3{1, 2, 3});

    Mat3 quarter;
    quarter.a = {0, -1, 0, 1, 0, 0, 0, 0, 1};
    const Vec3 turned = Ad_star(Rotation(quarter), {1, 0, 0});
    CHECK(norm(turned - Vec3{0, -1, 0}) <= 1e-15);

    oracles::TestRng rng(19);
    for (int i = 0; i < 100; ++i) {
        const Rotation r1 = rng.rotation(2.0);
        const Rotation r2 = rng.rotation(2.0);
        const Vec3 mu = rng.vec3(-3, 3);
        CHECK(std::fabs(norm(Ad_star(r1, mu)) - norm(mu)) <= 1e-13);
        const Vec3 lhs = Ad_star(composed(r1, r2), mu);
        const Vec3 rhs = Ad_star(r2, Ad_star(r1, mu));
        CHECK(norm(lhs - rhs) <= 1e-13);
    }
}

TEST_CASE("diamond satisfies its defining pairing") {
    CHECK(diamond({1, 0, 0}, {0, 1, 0}) == Vec3{0, 0, 1});
    CHECK(diamond({3, 3, 3}, {1, 1, 1}) == Vec3{0, 0, 0});
    CHECK(diamond({1, 2, 3}, {0, 0, 0}) == Vec3{0, 0, 0});

    oracles::TestRng rng(20);
    const Vec3 basis[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (int i = 0; i < 100; ++i) {
        const Vec3 v = rng.vec3(-3, 3);
        const Vec3 alpha = rng.vec3(-3, 3);
        for (const Vec3& xi : basis) {
            // <v diamond alpha, xi> = <xi x v, alpha>
            CHECK(dot(diamond(v, alpha), xi) ==
                  doctest::Approx(dot(cross(xi, v), alpha)).epsilon(1e-14));
        }
    }
}

TEST_CASE("rotation construction gates orthogonality and determinant") {
    Mat3 skewed = Mat3::identity();
    skewed(0, 1) = 1e-6;
    CHECK_THROWS_AS(Rotation{skewed}, DomainError);

    // Orthogonal but orientation-reversing.
    CHECK_THROWS_AS(Rotation{Mat3::diagonal(1.0, 1.0, -1.0)}, DomainError);

    Mat3 near = Mat3::identity();
    near(0, 1) = 1e-10; // within the 1e-9 gate
    CHECK_NOTHROW(Rotation{near});
}

TEST_CASE("solve3 solves and flags singular systems") {
    Mat3 m;
    m.a = {2, 1, 0, 1, 3, 1, 0, 1, 4};
    const Vec3 x{0.5, -1.25, 2.0};
    const Vec3 b = m * x;
    CHECK(norm(solve3(m, b) - x) <= 1e-14);

    CHECK_THROWS_AS((void)solve3(Mat3{}, {1, 0, 0}), DomainError);
}

} // TEST_SUITE
