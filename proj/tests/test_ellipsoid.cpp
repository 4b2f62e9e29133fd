#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <magsphere/ellipsoid.hpp>
#include <magsphere/rng.hpp>

#include <cmath>

using namespace magsphere;

namespace {

EllipsoidState random_point(Rng& rng, double alpha) {
    // distribute the constraint budget between the two circles
    const double t = rng.range(0.05, 0.95);
    const double r1 = std::sqrt(2 * t / (1 + alpha));
    const double r2 = std::sqrt(2 * (1 - t) / (1 - alpha));
    const double a1 = rng.range(0, 2 * M_PI), a2 = rng.range(0, 2 * M_PI);
    return ellipsoid_state({r1 * std::cos(a1), r1 * std::sin(a1)},
                           {r2 * std::cos(a2), r2 * std::sin(a2)}, alpha);
}

} // namespace

TEST_CASE("constraint preserved in closed form for |t| <= 100") {
    Rng rng(501);
    const double alpha = 0.37;
    for (int i = 0; i < 50; ++i) {
        const EllipsoidState s = random_point(rng, alpha);
        for (double t : {-100.0, -31.4, 0.1, 7.7, 100.0}) {
            CHECK(std::abs(reeb_flow(s, t).constraint() - 1.0) < 1e-12);
        }
    }
    CHECK_THROWS_AS(ellipsoid_state({2.0, 0}, {1.0, 0}, 0.3), std::invalid_argument);
}

TEST_CASE("alpha = 0: every orbit closes with period 2 pi") {
    Rng rng(503);
    for (int i = 0; i < 50; ++i) {
        const EllipsoidState s = random_point(rng, 0.0);
        const EllipsoidState back = reeb_flow(s, 2 * M_PI);
        CHECK(std::abs(back.z1 - s.z1) < 1e-12);
        CHECK(std::abs(back.z2 - s.z2) < 1e-12);
    }
}

TEST_CASE("axis orbits: periods 2 pi / (1 +- alpha)") {
    const double alpha = 0.1;
    const auto orbits = reeb_periodic_orbits(alpha);
    CHECK(orbits[0].period == doctest::Approx(2 * M_PI / 1.1).epsilon(1e-14));
    CHECK(orbits[1].period == doctest::Approx(2 * M_PI / 0.9).epsilon(1e-14));
    for (const ReebOrbit& o : orbits) {
        const EllipsoidState back = reeb_flow(o.representative, o.period);
        CHECK(std::abs(back.z1 - o.representative.z1) < 1e-13);
        CHECK(std::abs(back.z2 - o.representative.z2) < 1e-13);
    }
    // periods coincide only at alpha = 0
    CHECK(orbits[0].period != orbits[1].period);
    CHECK_THROWS_AS(reeb_periodic_orbits(0.0), std::invalid_argument);
    CHECK_THROWS_AS(reeb_periodic_orbits(1.0), std::invalid_argument);
}

TEST_CASE("the Liouville form evaluates to 1 on the Reeb velocity") {
    Rng rng(509);
    for (int i = 0; i < 200; ++i) {
        const EllipsoidState s = random_point(rng, rng.range(0.01, 0.9));
        CHECK(liouville_on_velocity(s) == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("irrational proxy: generic orbits do not close below the cap") {
    const double alpha = 0.5 * (std::sqrt(5.0) - 1.0) * 0.1;  // ~0.0618
    const EllipsoidState generic = ellipsoid_state(
        {std::sqrt(1.0 / (1 + alpha)), 0.0}, {std::sqrt(1.0 / (1 - alpha)), 0.0}, alpha);
    const ReturnScan scan = return_scan(generic, 100.0);
    CHECK(scan.min_defect > 0.1);

    // the axis circles do close; a window around one period isolates the
    // first return
    const auto orbits = reeb_periodic_orbits(alpha);
    for (const ReebOrbit& o : orbits) {
        const ReturnScan s = return_scan(o.representative, 1.5 * o.period);
        CHECK(s.min_defect < 1e-7);
        CHECK(s.t_at_min == doctest::Approx(o.period).epsilon(1e-6));
    }
}

TEST_CASE("near-axis tori register as non-closing at the orbit gate") {
    const double alpha = 0.5 * (std::sqrt(5.0) - 1.0) * 0.1;
    // |z2| small but positive: closes only to ~|z2| * phase miss, far above 1e-7
    const double z2 = 0.01;
    const double z1 = std::sqrt((2 - (1 - alpha) * z2 * z2) / (1 + alpha));
    const ReturnScan scan = return_scan(ellipsoid_state({z1, 0}, {z2, 0}, alpha), 100.0);
    CHECK(scan.min_defect > 1e-4);
}
