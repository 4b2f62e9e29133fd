#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <magsphere/hamiltonian.hpp>
#include <magsphere/katok.hpp>
#include <magsphere/rng.hpp>

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

Hamiltonian random_hamiltonian(Rng& rng) {
    switch (static_cast<int>(rng.range(0, 6))) {
        case 0: return Hamiltonian::round_kinetic();
        case 1: return Hamiltonian::rs(rng.range(0.1, 2.0));
        case 2: return Hamiltonian::omega_s(rng.range(0.0, 2.0));
        case 3: return Hamiltonian::katok_h(rng.range(0.1, 1.5), rng.range(0.0, 0.9));
        case 4: return Hamiltonian::w_family(rng.range(0.5, 2.0), rng.range(0.1, 1.0));
        default:
            return Hamiltonian::katok_kinetic(
                KatokParams(rng.range(0.0, 1.5), rng.range(0.0, 0.9), rng.range(0.01, 0.5)));
    }
}

} // namespace

TEST_CASE("one_forms: vertical directions are killed by zeta_x") {
    Rng rng(31);
    for (int i = 0; i < 200; ++i) {
        const CotangentState x = random_state(rng, 0.2, 3.0);
        const PhaseTangent w = vertical_lift(x, rng.unit_vec3());
        const OneForms f = one_forms(x, w, 0.7);
        CHECK(std::abs(f.zeta_x) < 1e-14);
        CHECK(std::abs(f.lambda) < 1e-14);
    }
}

TEST_CASE("one_forms: s = 0 collapses lambda_s to lambda") {
    Rng rng(37);
    for (int i = 0; i < 200; ++i) {
        const CotangentState x = random_state(rng, 0.2, 3.0);
        Vec4 w{};
        for (double& v : w) v = rng.range(-1, 1);
        const PhaseTangent pw = chart_tangent_to_ambient(x, w);
        const OneForms f = one_forms(x, pw, 0.0);
        CHECK(f.lambda_s == doctest::Approx(f.lambda).epsilon(1e-14));
    }
}

TEST_CASE("one_forms: horizontal lift of the dual vector gives |p|^2") {
    Rng rng(41);
    for (int i = 0; i < 200; ++i) {
        const CotangentState x = random_state(rng, 0.2, 3.0);
        const PhaseTangent w = horizontal_lift(x, x.p_dual);
        const OneForms f = one_forms(x, w);
        CHECK(f.zeta_x == doctest::Approx(norm2(x.p_dual)).epsilon(1e-12));
    }
}

TEST_CASE("one_forms: lambda_s rejects the zero section when s > 0") {
    const CotangentState x = cot_from_ambient(Vec3{1, 0, 0}, Vec3{0, 0, 0});
    const PhaseTangent w{{0, 1, 0}, {0, 0, 0}};
    CHECK_THROWS_AS(one_forms(x, w, 1.0), std::domain_error);
    CHECK_NOTHROW(one_forms(x, w, 0.0));
}

TEST_CASE("omega_pairing: canonical sign and antisymmetry") {
    const CotangentState x = cot_from_chart(Chart::A, M_PI / 2, 0.3, 0.2, 0.5);
    const MagneticForm none = MagneticForm::uniform(0);
    const Vec4 dpth{0, 0, 1, 0};
    const Vec4 dth{1, 0, 0, 0};
    CHECK(omega_pairing(none, x, dpth, dth) == doctest::Approx(1.0));

    Rng rng(43);
    for (int i = 0; i < 300; ++i) {
        const CotangentState y = random_state(rng, 0.1, 2.0);
        const MagneticForm sig = MagneticForm::uniform(rng.range(0, 2));
        Vec4 w1{}, w2{};
        for (int j = 0; j < 4; ++j) {
            w1[j] = rng.range(-1, 1);
            w2[j] = rng.range(-1, 1);
        }
        CHECK(std::abs(omega_pairing(sig, y, w1, w2) + omega_pairing(sig, y, w2, w1)) < 1e-12);
    }
}

TEST_CASE("omega_pairing: the magnetic term is -s mubar(dpi w1, dpi w2)") {
    Rng rng(47);
    for (int i = 0; i < 300; ++i) {
        const CotangentState x = random_state(rng, 0.1, 2.0);
        const double s = rng.range(0.1, 3.0);
        Vec4 w1{}, w2{};
        for (int j = 0; j < 4; ++j) {
            w1[j] = rng.range(-1, 1);
            w2[j] = rng.range(-1, 1);
        }
        const double lhs = omega_pairing(MagneticForm::uniform(s), x, w1, w2)
                         - omega_pairing(MagneticForm::uniform(0), x, w1, w2);
        // mubar on the projected tangents
        const TangentVector u1 = tangent_from_chart(x.q, w1[0], w1[1]);
        const TangentVector u2 = tangent_from_chart(x.q, w2[0], w2[1]);
        const double mu = triple(x.q.ambient, u1.ambient, u2.ambient);
        CHECK(lhs == doctest::Approx(-s * mu).epsilon(1e-10));
    }
}

TEST_CASE("hamiltonian partials agree with central differences") {
    Rng rng(53);
    int checked = 0;
    while (checked < 300) {
        const Hamiltonian H = random_hamiltonian(rng);
        const CotangentState x = random_state(rng, 0.3, 2.0);
        if (x.q.theta < 0.2 || x.q.theta > M_PI - 0.2) continue;
        const ChartCoords c = to_coords(x);
        Jet j;
        try {
            j = H.jet(c);
        } catch (const std::domain_error&) {
            continue;  // W family probe outside its domain
        }
        CHECK(j.v == doctest::Approx(H.value(x)).epsilon(1e-12));
        const double h = 1e-6;
        bool skipped = false;
        for (int i = 0; i < 4 && !skipped; ++i) {
            ChartCoords cp = c, cm = c;
            cp.y[i] += h;
            cm.y[i] -= h;
            double fd;
            try {
                fd = (H.value(from_coords(cp)) - H.value(from_coords(cm))) / (2 * h);
            } catch (const std::domain_error&) {
                skipped = true;
                break;
            }
            CHECK(j.d[i] == doctest::Approx(fd).epsilon(1e-6));
        }
        if (!skipped) ++checked;
    }
}

TEST_CASE("ham_vector_field: kinetic geodesic flow moves along the dual vector") {
    Rng rng(59);
    for (int i = 0; i < 100; ++i) {
        const CotangentState x = random_state(rng, 0.5, 2.0);
        if (x.q.theta < 0.2 || x.q.theta > M_PI - 0.2) continue;
        const Vec4 X = ham_vector_field(Hamiltonian::round_kinetic(), MagneticForm::uniform(0), x);
        const PhaseTangent pt = chart_tangent_to_ambient(x, X);
        CHECK(norm(pt.dq - x.p_dual) < 1e-9);
    }
}

TEST_CASE("ham_vector_field: X_{Omega_s} generates the lifted rotation") {
    Rng rng(61);
    const MagneticForm sig = MagneticForm::uniform(1.3);
    const Hamiltonian H = Hamiltonian::omega_s(1.3);
    for (int i = 0; i < 100; ++i) {
        const CotangentState x = random_state(rng, 0.3, 2.0);
        if (x.q.theta < 0.2 || x.q.theta > M_PI - 0.2) continue;
        const Vec4 X = ham_vector_field(H, sig, x);
        const PhaseTangent pt = chart_tangent_to_ambient(x, X);
        // generator of the lifted rotation about the z axis
        const Vec3 a{0, 0, 1};
        const Vec3 dq = cross(a, x.q.ambient);
        const Vec3 dp = cross(a, x.p_dual);
        CHECK(norm(pt.dq - dq) < 1e-9);
        CHECK(norm(pt.dp - dp) < 1e-9);
    }
}

TEST_CASE("ham_vector_field: residual below 1e-9 for random systems") {
    Rng rng(67);
    int checked = 0;
    while (checked < 1000) {
        const Hamiltonian H = random_hamiltonian(rng);
        MagneticForm sig = MagneticForm::uniform(rng.range(0, 2));
        if (rng.uniform() < 0.3)
            sig = MagneticForm::katok(KatokParams(rng.range(0.0, 1.5), rng.range(0.0, 0.9),
                                                  rng.range(0.01, 0.5)));
        const CotangentState x = random_state(rng, 0.3, 2.0);
        if (x.q.theta < 0.2 || x.q.theta > M_PI - 0.2) continue;
        try {
            const Vec4 X = ham_vector_field(H, sig, x);
            CHECK(ham_residual(H, sig, x, X) < 1e-9);
        } catch (const std::domain_error&) {
            continue;
        }
        ++checked;
    }
}

TEST_CASE("magnetic form: katok closed form density matches the generic FD route") {
    Rng rng(71);
    const KatokParams params(1.0, 0.3, 0.1);
    const MagneticForm closed = MagneticForm::katok(params);
    const MagneticForm generic = MagneticForm::custom(
        params.s, [&params](const Vec3& q) { return params.alpha * params.r_of(q.z); });
    for (int i = 0; i < 100; ++i) {
        const Vec3 q = rng.unit_vec3();
        if (std::abs(q.z) > 0.98) continue;
        CHECK(closed.density(q) == doctest::Approx(generic.density(q)).epsilon(1e-6));
    }
}
