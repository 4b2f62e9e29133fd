#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <magsphere/rng.hpp>
#include <magsphere/wfamily.hpp>

using namespace magsphere;

TEST_CASE("delta is the denominator's first fibre zero radius") {
    const WParams wp(1.0, 0.5);
    CHECK(wp.delta == doctest::Approx(std::sqrt(1.0 / 0.25 + 2.0 / 0.5)).epsilon(1e-14));
    // at |p| = m < delta the denominator stays positive on the whole fibre:
    // sup Omega_s over {|p| = m} is sqrt(m^2 + s^2)
    Rng rng(401);
    for (int i = 0; i < 200; ++i) {
        const double m = rng.range(0.0, 0.999) * wp.delta;
        const double denom_min = 1.0 + wp.eps * (wp.s - std::sqrt(m * m + wp.s * wp.s));
        CHECK(denom_min > 0);
    }
}

TEST_CASE("H_s vanishes on the zero section") {
    Rng rng(409);
    const WParams wp(1.0, 0.5);
    for (int i = 0; i < 100; ++i) {
        const CotangentState z = cot_from_ambient(rng.unit_vec3(), Vec3{0, 0, 0});
        CHECK(w_value(wp, z) == doctest::Approx(0.0).epsilon(1e-15));
    }
    CHECK_THROWS_AS(WParams(0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(WParams(1.0, -0.5), std::invalid_argument);
}

TEST_CASE("domain guard: |p| >= delta rejected") {
    const WParams wp(1.0, 0.5);
    const Vec3 q{1, 0, 0};
    const CotangentState outside = cot_from_ambient(q, Vec3{0, 1.01 * wp.delta, 0});
    CHECK_THROWS_AS(w_value(wp, outside), std::domain_error);
}

TEST_CASE("vertical Hessian at the zero section matches the closed form") {
    const WParams wp(1.0, 0.5);
    SUBCASE("north pole: gbar / s") {
        const SpherePoint np = sphere_from_ambient(Vec3{0, 0, 1});
        const auto h = vertical_hessian_fd(wp, np);
        CHECK(h[0][0] == doctest::Approx(1.0 / wp.s).epsilon(1e-5));
        CHECK(h[1][1] == doctest::Approx(1.0 / wp.s).epsilon(1e-5));
        CHECK(std::abs(h[0][1]) < 1e-5);
    }
    SUBCASE("100 base points, 1e-5 relative") {
        Rng rng(419);
        for (int i = 0; i < 100; ++i) {
            const SpherePoint q = sphere_from_ambient(rng.unit_vec3());
            const auto h = vertical_hessian_fd(wp, q);
            const double expected = vertical_hessian_expected(wp, q);
            CHECK(h[0][0] == doctest::Approx(expected).epsilon(1e-5));
            CHECK(h[1][1] == doctest::Approx(expected).epsilon(1e-5));
            CHECK(std::abs(h[0][1]) < 1e-5 * expected);
        }
    }
}

TEST_CASE("level identity: {H_s = k} = {H_{s,eps k} = s(1+eps k)+k}") {
    const WParams wp(1.0, 0.5);
    const double k = 1e-3;
    Rng rng(421);
    for (int i = 0; i < 100; ++i) {
        const SpherePoint q = sphere_from_ambient(rng.unit_vec3());
        const Vec3 dir = normalized(cross(q.ambient, rng.unit_vec3()));
        const WLevelMatch match = w_level_identity_defect(wp, k, q, dir);
        CHECK(match.defect < 1e-8);
        CHECK(match.w_radius < wp.delta);
    }
}

TEST_CASE("level escape: k too large is an error") {
    const WParams wp(1.0, 0.5);
    const SpherePoint q = sphere_from_ambient(Vec3{1, 0, 0});
    const Vec3 dir{0, 1, 0};
    // with eps(s - Omega) shrinking the denominator, enormous k pushes the
    // ray radius past delta before the root is reached
    CHECK_THROWS(w_level_identity_defect(wp, 100.0, q, dir));
}

TEST_CASE("convexity shrink report: k_max keeps the level inside shrink*delta") {
    const WParams wp(1.0, 0.5, 0.5);
    const WConvexityReport rep = w_max_convex_k(wp, 32, 0);
    CHECK(rep.k_max > 0);
    CHECK(rep.max_level_radius <= wp.shrink * wp.delta * (1 + 1e-6));
    CHECK(rep.min_hessian_eig > 0);
}
