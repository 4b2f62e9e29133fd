#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <magsphere/integrate.hpp>
#include <magsphere/katok.hpp>
#include <magsphere/rng.hpp>
#include <magsphere/sequence.hpp>
#include <magsphere/config.hpp>

#include <sstream>

using namespace magsphere;

namespace {

CotangentState random_state(Rng& rng, double pmin, double pmax) {
    const Vec3 q = rng.unit_vec3();
    const Vec3 e1 = normalized(cross(q, rng.unit_vec3()));
    const Vec3 e2 = cross(q, e1);
    const double psi = rng.range(0, 2 * M_PI);
    const double m = rng.range(pmin, pmax);
    return cot_from_ambient(q, m * (std::cos(psi) * e1 + std::sin(psi) * e2));
}

} // namespace

TEST_CASE("R_s and Omega_s: displayed values") {
    Rng rng(301);
    CotangentState x = random_state(rng, 4.0, 4.0);
    x = cot_from_ambient(x.q.ambient, 4.0 * x.p_dual / pnorm(x));
    CHECK(R_s(0, x) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(R_s(3, x) == doctest::Approx(5.0).epsilon(1e-12));

    // Omega_s on the zero section is s h, with range [-s, s]
    for (int i = 0; i < 100; ++i) {
        const Vec3 q = rng.unit_vec3();
        const CotangentState z = cot_from_ambient(q, Vec3{0, 0, 0});
        const double s = rng.range(0.1, 2.0);
        CHECK(Omega_s(s, z) == doctest::Approx(s * q.z).epsilon(1e-12));
        CHECK(std::abs(Omega_s(s, z)) <= s + 1e-12);
    }
}

TEST_CASE("conjugacy identities through Psi_s at 1000 random states") {
    Rng rng(307);
    for (double s : {0.1, 1.0, 3.0}) {
        const double alpha = 0.37;
        for (int i = 0; i < 1000; ++i) {
            const CotangentState x = random_state(rng, s + 1e-3, s + 5);
            const CotangentState y = psi_forward(s, x);
            CHECK(std::abs(R_s(s, y) - R_s(0, x)) < 1e-10);
            CHECK(std::abs(Omega_s(s, y) - Omega_s(0, x)) < 1e-10);
            CHECK(std::abs(H_salpha(s, alpha, y) - H_salpha(0, alpha, x)) < 1e-10);
        }
    }
}

TEST_CASE("H_{0,alpha} image of the radius-m sphere bundle is [m(1-alpha), m(1+alpha)]") {
    const double alpha = 0.6, m = 1.7;
    double lo = 1e300, hi = -1e300;
    // extremes are attained where |dphi| = 1, so scan base colatitude too
    for (int it = 0; it <= 256; ++it) {
        const double th = 1e-3 + (M_PI - 2e-3) * it / 256;
        const SpherePoint q = sphere_from_chart(Chart::A, th, 0.37);
        const Vec3 e1 = partial_theta(q);
        const Vec3 e2 = normalized(partial_phi(q));
        for (int i = 0; i < 1024; ++i) {
            const double psi = 2 * M_PI * i / 1024;
            const CotangentState x =
                cot_from_ambient(q.ambient, m * (std::cos(psi) * e1 + std::sin(psi) * e2));
            const double v = H_salpha(0, alpha, x);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    CHECK(lo == doctest::Approx(m * (1 - alpha)).epsilon(1e-5));
    CHECK(hi == doctest::Approx(m * (1 + alpha)).epsilon(1e-5));
}

TEST_CASE("H_{s,alpha}: fibrewise convexity by sampled Hessians, coercivity flag") {
    CHECK(coercive_fibrewise(0.9));
    CHECK_FALSE(coercive_fibrewise(1.0));
    CHECK(level_in_punctured(1.5, 1.0, 0.3));
    CHECK_FALSE(level_in_punctured(1.3, 1.0, 0.3));

    Rng rng(313);
    for (double alpha : {0.0, 0.3, 0.9}) {
        for (double s : {0.0, 1.0}) {
            double min_eig = 1e300, min_transverse = 1e300;
            for (int i = 0; i < 1000; ++i) {
                const CotangentState x = random_state(rng, 0.3, 2.5);
                const Vec3 q = x.q.ambient;
                // radial/transverse fibre frame at p
                const Vec3 e1 = x.p_dual / pnorm(x);
                const Vec3 e2 = normalized(cross(q, e1));
                auto H = [&](double u, double v) {
                    return H_salpha(s, alpha,
                                    cot_from_ambient(q, x.p_dual + u * e1 + v * e2));
                };
                const double t = 1e-4;
                const double h00 = H(0, 0);
                const double a = (H(t, 0) + H(-t, 0) - 2 * h00) / (t * t);
                const double d = (H(0, t) + H(0, -t) - 2 * h00) / (t * t);
                const double b = (H(t, t) - H(t, -t) - H(-t, t) + H(-t, -t)) / (4 * t * t);
                const double tr = a + d, det = a * d - b * b;
                min_eig = std::min(min_eig, 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4 * det))));
                min_transverse = std::min(min_transverse, d);
            }
            if (s > 0) {
                // strictly convex in every fibre direction
                CHECK(min_eig > 0.0);
            } else {
                // degree-1 homogeneous: the radial eigenvalue is exactly 0,
                // convexity is strict transversally to the rays
                CHECK(min_eig > -1e-6);
                CHECK(min_transverse > 0.0);
            }
        }
    }
}

TEST_CASE("closed_flow: unit-speed geodesic transport at alpha = 0") {
    Rng rng(317);
    for (int i = 0; i < 50; ++i) {
        const CotangentState x = random_state(rng, 0.4, 3.0);
        // period 2 pi on every level
        CHECK(phase_distance(closed_flow(0, 0, x, 2 * M_PI), x) < 1e-12);
        // |p| preserved
        CHECK(pnorm(closed_flow(0, 0, x, 1.3)) == doctest::Approx(pnorm(x)).epsilon(1e-12));
    }
}

TEST_CASE("closed_flow: equatorial orbits have periods 2 pi / (1 +- alpha)") {
    const double alpha = 0.23;
    // co-rotating: covector along +dphi at the equator
    const CotangentState co = cot_from_chart(Chart::A, M_PI / 2, 0.7, 0.0, 1.4);
    CHECK(phase_distance(closed_flow(0, alpha, co, 2 * M_PI / (1 + alpha)), co) < 1e-12);
    // counter-rotating
    const CotangentState counter = cot_from_chart(Chart::A, M_PI / 2, 0.7, 0.0, -1.4);
    CHECK(phase_distance(closed_flow(0, alpha, counter, 2 * M_PI / (1 - alpha)), counter) < 1e-12);
    // the same periods persist under the s > 0 conjugation
    const double s = 0.8;
    const CotangentState co_s = psi_forward(s, cot_from_chart(Chart::A, M_PI / 2, 0.7, 0.0, 1.4 + s));
    CHECK(phase_distance(closed_flow(s, alpha, co_s, 2 * M_PI / (1 + alpha)), co_s) < 1e-10);
}

TEST_CASE("closed_flow: flow property and conserved quantities") {
    Rng rng(331);
    for (int i = 0; i < 100; ++i) {
        const double s = rng.range(0, 1.5);
        const double alpha = rng.range(0, 0.9);
        const CotangentState x = random_state(rng, 0.2, 3.0);
        const double t = rng.range(-3, 3), u = rng.range(-3, 3);
        const CotangentState a = closed_flow(s, alpha, closed_flow(s, alpha, x, u), t);
        const CotangentState b = closed_flow(s, alpha, x, t + u);
        CHECK(phase_distance(a, b) < 1e-10);
        CHECK(std::abs(H_salpha(s, alpha, b) - H_salpha(s, alpha, x)) < 1e-10);
        CHECK(std::abs(R_s(s, b) - R_s(s, x)) < 1e-10);
        CHECK(std::abs(Omega_s(s, b) - Omega_s(s, x)) < 1e-10);
    }
    CHECK_THROWS_AS(closed_flow(1.0, 0.2, cot_from_ambient(Vec3{1, 0, 0}, Vec3{0, 0, 0}), 1.0),
                    std::domain_error);
}

TEST_CASE("closed_flow matches the integrator for (s, alpha) = (0.7, 0.3)") {
    Rng rng(337);
    const double s = 0.7, alpha = 0.3;
    const CotangentState x = random_state(rng, s + 0.4, s + 2.0);
    const FlowResult fl =
        integrate(Hamiltonian::katok_h(s, alpha), MagneticForm::uniform(s), x, 10.0, 1e-10);
    REQUIRE(fl.status == FlowStatus::Ok);
    for (int i = 0; i <= 40; ++i) {
        const double t = 10.0 * i / 40;
        CHECK(phase_distance(fl.eval(t), closed_flow(s, alpha, x, t)) < 1e-6);
    }
}

TEST_CASE("katok_metric: alpha = 0 collapses to the round metric") {
    Rng rng(347);
    const double s = 1.1, k = 0.07;
    const KatokParams params(s, 0.0, k);
    for (int i = 0; i < 100; ++i) {
        const SpherePoint q = sphere_from_ambient(rng.unit_vec3());
        const KatokMetricAt m = katok_metric(params, q);
        CHECK(m.r == doctest::Approx(params.c).epsilon(1e-14));
        CHECK(m.y2 == doctest::Approx(2 * k).epsilon(1e-12));
        CHECK(norm(m.eta_dual) < 1e-15);
        const Vec3 p = rng.unit_vec3();
        const Vec3 pt = p - dot(p, q.ambient) * q.ambient;
        CHECK(m.g(pt, pt) == doctest::Approx(dot(pt, pt)).epsilon(1e-12));
        // {F = 1} = {|p| = sqrt(2k)}
        CHECK(m.F(std::sqrt(2 * k) * normalized(pt)) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("katok_metric: positive definite cometric for (1, 0.2, 0.05)") {
    Rng rng(349);
    const KatokParams params(1.0, 0.2, 0.05);
    double min_eig = 1e300;
    for (int i = 0; i < 1000; ++i) {
        const SpherePoint q = sphere_from_ambient(rng.unit_vec3());
        const KatokMetricAt m = katok_metric(params, q);
        // eigenvalues of the cometric: scale and scale (1 - alpha^2 w)
        const double scale = 2 * params.k / m.y2;
        const double w = norm2(m.dphi);
        min_eig = std::min({min_eig, scale, scale * (1 - params.alpha * params.alpha * w)});
    }
    CHECK(min_eig > 0.0);
}

TEST_CASE("katok params: constructor guards") {
    CHECK_THROWS_AS(KatokParams(1.0, 1.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(KatokParams(1.0, -0.1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(KatokParams(1.0, 0.3, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(KatokParams(-1.0, 0.3, 0.1), std::invalid_argument);
}

TEST_CASE("level identity: alpha = 0 reduces to R_s = c") {
    Rng rng(353);
    const KatokParams params(1.3, 0.0, 0.2);
    for (int i = 0; i < 200; ++i) {
        const CotangentState x = random_state(rng, 0.1, 3.0);
        const LevelIdentity li = level_identity_defect(params, x);
        CHECK(li.defect < 1e-12);
        CHECK(li.rhs_margin > 0);
    }
}

TEST_CASE("level identity: (1, 0.3, 0.1) at 1000 random states") {
    Rng rng(359);
    const KatokParams params(1.0, 0.3, 0.1);
    for (int i = 0; i < 1000; ++i) {
        const CotangentState x = random_state(rng, 0.05, 4.0);
        const LevelIdentity li = level_identity_defect(params, x);
        CHECK(li.defect < 1e-9);
        CHECK(li.rhs_margin > 0);
    }
}

TEST_CASE("appendix validators") {
    SUBCASE("alpha = 0: y2 = 2k everywhere") {
        const KatokParams params(0.9, 0.0, 0.15);
        const AppendixReport rep = appendix_validate(params, 64, 16, 4);
        CHECK(rep.min_y2 == doctest::Approx(2 * params.k).epsilon(1e-10));
        CHECK(rep.max_y1_abs < 1e-12);
    }
    SUBCASE("(2, 0.5, 0.01): positivity chain on the grid") {
        const KatokParams params(2.0, 0.5, 0.01);
        const AppendixReport rep = appendix_validate(params, 128, 32, 8);
        CHECK(rep.min_y2 > 0);
        CHECK(rep.min_chain_gap > 0);
        CHECK(rep.max_y1_abs < 1e-10);
        CHECK(rep.max_quad_resid < 1e-10);
        CHECK(rep.max_f_solve_dev < 1e-10);
        CHECK(rep.min_rhs_margin > 0);
        CHECK(rep.min_weight > 0);
        CHECK(rep.ok());
    }
    SUBCASE("y1 defect at 1000 random states") {
        Rng rng(367);
        const KatokParams params(1.0, 0.4, 0.1);
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const CotangentState x = random_state(rng, 0.2, 2.0);
            const KatokMetricAt m = katok_metric(params, x.q);
            const double w = norm2(m.dphi);
            const double bracket = params.c + params.alpha * (params.alpha * m.r * w)
                                 - params.alpha * params.s * m.h;
            const double y1 = dot(x.p_dual, m.eta_dual)
                            - params.alpha * bracket * dot(x.p_dual, m.dphi);
            worst = std::max(worst, std::abs(y1));
        }
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("iso2: kinetic level radius equals the shifted level radius") {
    Rng rng(373);
    for (const auto& [s, alpha, k] :
         {std::tuple{1.0, 0.3, 0.1}, std::tuple{2.0, 0.5, 0.01}, std::tuple{0.5, 0.9, 0.05}}) {
        const KatokParams params(s, alpha, k);
        for (int i = 0; i < 100; ++i) {
            const SpherePoint q = sphere_from_ambient(rng.unit_vec3());
            const RadiusMatch rm = iso2_radius_match(params, q, rng.unit_vec3());
            CHECK(rm.defect < 1e-9);
        }
    }
}

TEST_CASE("quadratic consistency: y2 F^2 + 2 y1 F - y0 = 0 at random covectors") {
    Rng rng(379);
    const KatokParams params(1.4, 0.35, 0.08);
    for (int i = 0; i < 1000; ++i) {
        const CotangentState x = random_state(rng, 0.2, 3.0);
        const KatokMetricAt m = katok_metric(params, x.q);
        const double w = norm2(m.dphi);
        const double pf = dot(x.p_dual, m.dphi);
        const double bracket = params.c + params.alpha * (params.alpha * m.r * w)
                             - params.alpha * params.s * m.h;
        const double y0 = norm2(x.p_dual) - params.alpha * params.alpha * pf * pf;
        const double y1 = dot(x.p_dual, m.eta_dual) - params.alpha * bracket * pf;
        const double y2 = bracket * bracket - norm2(m.eta_dual) - params.s * params.s;
        const double F = m.F(x.p_dual);
        CHECK(std::abs(y2 * F * F + 2 * y1 * F - y0) < 1e-9);
    }
}

TEST_CASE("magnetic katok system: the kinetic energy sits at k on the kinetic level") {
    Rng rng(383);
    const MagneticKatokSystem sys = magnetic_katok_system(KatokParams(1.0, 0.1, 0.125));
    for (int i = 0; i < 100; ++i) {
        const SpherePoint q = sphere_from_ambient(rng.unit_vec3());
        const KatokMetricAt m = katok_metric(sys.params, q);
        Vec3 dir = cross(q.ambient, rng.unit_vec3());
        dir = normalized(dir);
        const double radius = 1.0 / m.F(dir);
        const CotangentState x = cot_from_ambient(q.ambient, radius * dir);
        CHECK(sys.hamiltonian.value(x) == doctest::Approx(sys.energy).epsilon(1e-10));
    }
}

TEST_CASE("sequence: r_n -> s and the metric ratio -> 1") {
    const SequenceSpec spec{1.0, SequenceSpec::AlphaRule::GoldenK2};
    // r_n at the equator converges to s
    for (int n : {10, 12, 14}) {
        const KatokParams p = spec.params(n);
        CHECK(std::abs(p.r_of(0.0) - spec.s) < 1e-3);
    }
    const auto rows = convergence_report(spec, 16, 128, 1);
    CHECK(rows.size() == 16);
    // strictly decreasing sups for n >= 4
    for (std::size_t i = 4; i < rows.size(); ++i) {
        CHECK(rows[i].sup_g_dev < rows[i - 1].sup_g_dev);
        CHECK(rows[i].sup_eta < rows[i - 1].sup_eta);
    }
    CHECK(std::abs(rows.back().ratio - 1.0) < 1e-3);
    // the ratio limit is approached at the rate alpha_n/k_n + k_n
    for (int n : {8, 12, 16}) {
        const double k = spec.k(n), a = spec.alpha(n);
        CHECK(std::abs(convergence_report(spec, n, 32, 1).back().ratio - 1.0)
              < 10 * (a / k + k));
    }
}

TEST_CASE("sequence: s = 0 with the weak rule alpha_n = k_n still converges") {
    const SequenceSpec spec{0.0, SequenceSpec::AlphaRule::EqualK};
    const auto rows = convergence_report(spec, 14, 128, 1);
    for (std::size_t i = 4; i < rows.size(); ++i) {
        CHECK(rows[i].sup_g_dev < rows[i - 1].sup_g_dev);
        CHECK(rows[i].sup_eta < rows[i - 1].sup_eta);
    }
    CHECK(std::abs(rows.back().ratio - 1.0) < 2e-4);
}

TEST_CASE("parameter config: section roundtrip") {
    ParamConfig cfg;
    config_put(cfg, KatokParams(1.5, 0.25, 0.0625));
    config_put(cfg, WParams(2.0, 0.75, 0.4));
    config_put(cfg, SequenceSpec{1.0, SequenceSpec::AlphaRule::GoldenK2}, 7);

    std::ostringstream os;
    write_config(cfg, os);
    std::istringstream is(os.str());
    const ParamConfig back = parse_config(is);

    const KatokParams kp = katok_from_config(back);
    CHECK(kp.s == 1.5);
    CHECK(kp.alpha == 0.25);
    CHECK(kp.k == 0.0625);
    const WParams wp = wparams_from_config(back);
    CHECK(wp.s == 2.0);
    CHECK(wp.eps == 0.75);
    CHECK(wp.shrink == 0.4);
    CHECK(back.get("sequence", "n") == 7);

    // comments and blank lines tolerated
    std::istringstream dirty("# header\n[katok]\ns = 1.0 ; inline\nalpha=0.1\nk=0.5\n\n");
    const ParamConfig d = parse_config(dirty);
    CHECK(d.get("katok", "s") == 1.0);
    CHECK(d.get("katok", "alpha") == 0.1);

    std::istringstream bad("[katok]\nnot a pair\n");
    CHECK_THROWS_AS(parse_config(bad), std::invalid_argument);
}

TEST_CASE("sequence: golden-ratio alphas satisfy alpha_n / k_n -> 0 monotonically") {
    const SequenceSpec spec{1.0, SequenceSpec::AlphaRule::GoldenK2};
    double prev = 1e300;
    for (int n = 1; n <= 16; ++n) {
        const double ratio = spec.alpha(n) / spec.k(n);
        CHECK(ratio < prev);
        prev = ratio;
    }
}
