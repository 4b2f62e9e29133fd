#ifndef MAGSPHERE_HAMILTONIAN_HPP
#define MAGSPHERE_HAMILTONIAN_HPP

#include <cmath>
#include <functional>
#include <stdexcept>

#include "katok_params.hpp"
#include "state.hpp"

namespace magsphere {

// ---------------------------------------------------------------------------
// Magnetic forms sigma = s mubar + d(f beta).

/// Descriptor of a magnetic 2-form. Every 2-form on S^2 is a multiple of the
/// area form; density() returns sigma / mubar at a point. The exact part
/// d(f beta) uses the registered closed form for f = alpha r (Katok) and
/// chart finite differences for a custom f.
struct MagneticForm {
    double s = 0.0;
    enum class Exact { None, KatokEta, Custom } exact = Exact::None;
    KatokParams kp;                                   // for Exact::KatokEta
    std::function<double(const Vec3&)> f;             // for Exact::Custom
    Vec3 axis{0, 0, 1};

    static MagneticForm uniform(double s_) {
        MagneticForm m;
        m.s = s_;
        return m;
    }
    static MagneticForm katok(const KatokParams& params) {
        MagneticForm m;
        m.s = params.s;
        m.exact = Exact::KatokEta;
        m.kp = params;
        return m;
    }
    static MagneticForm custom(double s_, std::function<double(const Vec3&)> f_) {
        MagneticForm m;
        m.s = s_;
        m.exact = Exact::Custom;
        m.f = std::move(f_);
        return m;
    }

    double density(const Vec3& q) const {
        switch (exact) {
            case Exact::None:
                return s;
            case Exact::KatokEta:
                return kp.sigma_density(dot(normalized(axis), q));
            case Exact::Custom:
                return s + custom_density(q);
        }
        return s;
    }

private:
    // d(f beta)/mubar by central differences of the chart coefficients of
    // f beta in the canonical chart at q.
    double custom_density(const Vec3& q) const {
        const Vec3 a = normalized(axis);
        const SpherePoint p0 = sphere_from_ambient(q);
        const double h = 1e-6;
        auto kappa = [&](double th, double ph, int comp) {
            const SpherePoint p = sphere_from_chart(p0.chart, th, ph);
            const Vec3 beta_dual = cross(a, p.ambient);
            const Vec3 e = (comp == 0) ? partial_theta(p) : partial_phi(p);
            return f(p.ambient) * dot(beta_dual, e);
        };
        const double dkphi_dth = (kappa(p0.theta + h, p0.phi, 1) - kappa(p0.theta - h, p0.phi, 1)) / (2 * h);
        const double dkth_dph = (kappa(p0.theta, p0.phi + h, 0) - kappa(p0.theta, p0.phi - h, 0)) / (2 * h);
        return (dkphi_dth - dkth_dph) / std::sin(p0.theta);
    }
};

// ---------------------------------------------------------------------------
// Hamiltonians.

/// Hamiltonian descriptor. Each variant provides the value and closed-form
/// first partials in canonical chart coordinates (through the jet of the
/// ambient representation).
struct Hamiltonian {
    enum class Kind { RoundKinetic, KatokKinetic, Rs, OmegaS, KatokH, WFamily } kind = Kind::RoundKinetic;
    double s = 0.0;
    double alpha = 0.0;
    double eps = 0.0;
    KatokParams kp;     // KatokKinetic
    Vec3 axis{0, 0, 1};

    static Hamiltonian round_kinetic() { return {}; }
    static Hamiltonian katok_kinetic(const KatokParams& params) {
        Hamiltonian h;
        h.kind = Kind::KatokKinetic;
        h.kp = params;
        h.s = params.s;
        h.alpha = params.alpha;
        return h;
    }
    static Hamiltonian rs(double s_) {
        Hamiltonian h;
        h.kind = Kind::Rs;
        h.s = s_;
        return h;
    }
    static Hamiltonian omega_s(double s_) {
        Hamiltonian h;
        h.kind = Kind::OmegaS;
        h.s = s_;
        return h;
    }
    static Hamiltonian katok_h(double s_, double alpha_) {
        Hamiltonian h;
        h.kind = Kind::KatokH;
        h.s = s_;
        h.alpha = alpha_;
        return h;
    }
    static Hamiltonian w_family(double s_, double eps_) {
        if (s_ <= 0 || eps_ <= 0) throw std::invalid_argument("w_family: s and eps must be > 0");
        Hamiltonian h;
        h.kind = Kind::WFamily;
        h.s = s_;
        h.eps = eps_;
        return h;
    }

    /// True when the zero section is a genuine singularity of the variant.
    bool requires_punctured() const {
        return (kind == Kind::Rs || kind == Kind::KatokH) && s == 0.0;
    }

    double value(const CotangentState& x) const {
        const Vec3 a = normalized(axis);
        const Vec3& q = x.q.ambient;
        const Vec3& p = x.p_dual;
        const double psq = norm2(p);
        const double h = dot(a, q);
        const double am = triple(a, q, p);  // p(d/dphi) of the axis frame
        switch (kind) {
            case Kind::RoundKinetic:
                return 0.5 * psq;
            case Kind::KatokKinetic:
                return kp.k * (psq - kp.alpha * kp.alpha * am * am) / kp.y2_of(h);
            case Kind::Rs:
                return std::sqrt(psq + s * s);
            case Kind::OmegaS:
                return am + s * h;
            case Kind::KatokH:
                return std::sqrt(psq + s * s) + alpha * (am + s * h);
            case Kind::WFamily: {
                const double denom = 1.0 + eps * (s - (am + s * h));
                if (denom <= 1e-12) throw std::domain_error("WFamily: outside domain of definition");
                return (std::sqrt(psq + s * s) - s) / denom;
            }
        }
        return 0.0;
    }

    /// Value and chart partials at the given chart coordinates.
    Jet jet(const ChartCoords& c) const { return jet_from(ambient_jets(c)); }

    /// Same, from precomputed ambient jets (shared with the sigma coefficient
    /// in the flow right-hand side).
    Jet jet_from(const AmbientJets& aj) const {
        const Vec3 a = normalized(axis);
        const JetVec3 A{Jet(a.x), Jet(a.y), Jet(a.z)};
        const Jet psq = dot(aj.p, aj.p);
        const Jet h = dot(A, aj.q);
        const Jet am = dot(A, cross(aj.q, aj.p));
        switch (kind) {
            case Kind::RoundKinetic:
                return 0.5 * psq;
            case Kind::KatokKinetic:
                return kp.k * (psq - (kp.alpha * kp.alpha) * am * am) / kp.y2_of(h);
            case Kind::Rs:
                return sqrt(psq + s * s);
            case Kind::OmegaS:
                return am + s * h;
            case Kind::KatokH:
                return sqrt(psq + s * s) + alpha * (am + s * h);
            case Kind::WFamily: {
                const Jet denom = 1.0 + eps * (s - (am + s * h));
                if (denom.v <= 1e-12) throw std::domain_error("WFamily: outside domain of definition");
                return (sqrt(psq + s * s) - s) / denom;
            }
        }
        return Jet(0.0);
    }
};

// ---------------------------------------------------------------------------
// The tautological and frame 1-forms on T*S^2.

struct OneForms {
    double lambda = 0.0;   // canonical 1-form, equals zeta_x
    double zeta_x = 0.0;   // gbar(d pi (w), p-dual)
    double zeta_v = 0.0;   // gbar(connection projection of w, jrot(p-dual))
    double lambda_s = 0.0; // zeta_x + s zeta_v / |p|^2
};

/// Evaluate lambda, zeta_x, zeta_v and lambda_s on a phase tangent.
/// lambda_s requires |p| > 0 when s != 0.
inline OneForms one_forms(const CotangentState& x, const PhaseTangent& w, double s = 0.0) {
    OneForms f;
    f.zeta_x = dot(x.p_dual, w.dq);
    f.lambda = f.zeta_x;
    const Vec3 conn = w.dp + dot(x.p_dual, w.dq) * x.q.ambient;  // connection projection
    f.zeta_v = dot(conn, cross(x.q.ambient, x.p_dual));
    const double psq = norm2(x.p_dual);
    if (s != 0.0 && psq < 1e-300)
        throw std::domain_error("one_forms: lambda_s undefined on the zero section");
    f.lambda_s = (s == 0.0) ? f.lambda : f.lambda + s * f.zeta_v / psq;
    return f;
}

/// Horizontal lift of the tangent vector v at the base point of x.
inline PhaseTangent horizontal_lift(const CotangentState& x, const Vec3& v) {
    const Vec3 vt = v - dot(v, x.q.ambient) * x.q.ambient;
    return {vt, -dot(x.p_dual, vt) * x.q.ambient};
}

/// Vertical lift of the covector with dual vector xi at the base point of x.
inline PhaseTangent vertical_lift(const CotangentState& x, const Vec3& xi) {
    return {{0, 0, 0}, xi - dot(xi, x.q.ambient) * x.q.ambient};
}

// ---------------------------------------------------------------------------
// Twisted symplectic pairing and the Hamiltonian vector field.

/// omega_sigma = dp_theta ^ dtheta + dp_phi ^ dphi - sigma, on chart tangent
/// 4-vectors (dtheta, dphi, dp_theta, dp_phi) at the given state.
inline double omega_pairing(const MagneticForm& sigma, const CotangentState& x, const Vec4& w1,
                            const Vec4& w2) {
    const double coeff = sigma.density(x.q.ambient) * std::sin(x.q.theta);
    return w1[2] * w2[0] - w1[0] * w2[2] + w1[3] * w2[1] - w1[1] * w2[3]
         - coeff * (w1[0] * w2[1] - w1[1] * w2[0]);
}

namespace detail {
inline Vec4 ham_rhs(const Hamiltonian& H, const MagneticForm& sigma, const ChartCoords& c) {
    const AmbientJets aj = ambient_jets(c);
    const Jet hj = H.jet_from(aj);
    // sigma coefficient needs the ambient base point; reuse the jet values.
    const Vec3 q{aj.q.x.v, aj.q.y.v, aj.q.z.v};
    const double coeff = sigma.density(q) * std::sin(c.y[0]);
    // Solve omega_sigma(X, .) = -dH on the chart basis:
    // A[i][j] = omega(e_j, e_i), same sign conventions as omega_pairing.
    const Mat4 a{{{0, coeff, 1, 0}, {-coeff, 0, 0, 1}, {-1, 0, 0, 0}, {0, -1, 0, 0}}};
    const Vec4 rhs{-hj.d[0], -hj.d[1], -hj.d[2], -hj.d[3]};
    return solve4(a, rhs);
}
} // namespace detail

/// The unique X with omega_sigma(X, .) = -dH, as a chart tangent 4-vector.
inline Vec4 ham_vector_field(const Hamiltonian& H, const MagneticForm& sigma,
                             const ChartCoords& c) {
    return detail::ham_rhs(H, sigma, c);
}

inline Vec4 ham_vector_field(const Hamiltonian& H, const MagneticForm& sigma,
                             const CotangentState& x) {
    return detail::ham_rhs(H, sigma, to_coords(x));
}

/// max_i |omega_sigma(X, e_i) + dH(e_i)| over the chart basis.
inline double ham_residual(const Hamiltonian& H, const MagneticForm& sigma, const CotangentState& x,
                           const Vec4& X) {
    const Jet hj = H.jet(to_coords(x));
    double worst = 0.0;
    for (int i = 0; i < 4; ++i) {
        Vec4 e{};
        e[i] = 1.0;
        worst = std::max(worst, std::abs(omega_pairing(sigma, x, X, e) + hj.d[i]));
    }
    return worst;
}

} // namespace magsphere

#endif
