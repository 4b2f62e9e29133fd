#ifndef MAGSPHERE_KATOK_HPP
#define MAGSPHERE_KATOK_HPP

#include <cmath>
#include <functional>
#include <stdexcept>

#include "katok_params.hpp"
#include "psi.hpp"

namespace magsphere {

// ---------------------------------------------------------------------------
// The two commuting circle-action Hamiltonians and their superposition.

inline double R_s(double s, const CotangentState& x) {
    return std::sqrt(norm2(x.p_dual) + s * s);
}

inline double Omega_s(double s, const CotangentState& x, const Vec3& axis = {0, 0, 1}) {
    const Vec3 a = normalized(axis);
    return triple(a, x.q.ambient, x.p_dual) + s * dot(a, x.q.ambient);
}

inline double H_salpha(double s, double alpha, const CotangentState& x,
                       const Vec3& axis = {0, 0, 1}) {
    return R_s(s, x) + alpha * Omega_s(s, x, axis);
}

inline bool coercive_fibrewise(double alpha) { return alpha < 1.0; }

/// Level {H_{s,alpha} = c} avoids the zero section iff c > s(1 + alpha).
inline bool level_in_punctured(double c, double s, double alpha) { return c > s * (1 + alpha); }

/// Exact flow of H_{s,alpha}. For s = 0 it is the superposition of the
/// unit-speed geodesic flow with the lifted rotation at angular speed alpha
/// (two commuting circle actions). For s > 0 it is the conjugation
/// Psi_s o Phi^{H_{0,alpha}}_t o Psi_s^{-1}, defined on {|p| > 0}.
inline CotangentState closed_flow(double s, double alpha, const CotangentState& x, double t,
                                  const Vec3& axis = {0, 0, 1}) {
    const double n = pnorm(x);
    if (n < 1e-300) throw std::domain_error("closed_flow: zero covector");
    if (s == 0.0) {
        const Mat3 rot = rotation_about(normalized(axis), alpha * t);
        const CotangentState xr = isometry_lift(rot, x);
        const double m = pnorm(xr);
        const Vec3 u = xr.p_dual / m;
        const Vec3 q1 = std::cos(t) * xr.q.ambient + std::sin(t) * u;
        const Vec3 p1 = m * (std::cos(t) * u - std::sin(t) * xr.q.ambient);
        return cot_from_ambient(q1, p1);
    }
    return psi_forward(s, closed_flow(0.0, alpha, psi_inverse(s, x), t, axis));
}

// ---------------------------------------------------------------------------
// The Katok cometric, Finsler norm and shift form at a base point.

/// Pointwise data of the metric g_{s,alpha,k}: the cometric on covectors is
///   g(p1,p2) = (2k / y2) (p1.p2 - alpha^2 p1(dphi) p2(dphi)),
/// the norm is F(p)^2 = (|p|^2 - alpha^2 p(dphi)^2)/y2, and the shift form
/// is eta = alpha r beta (dual vector alpha r (axis x q)).
struct KatokMetricAt {
    KatokParams params;
    Vec3 q;
    Vec3 dphi;       // axis x q (dual vector of beta)
    double h = 0.0;  // cos(theta) about the axis
    double r = 0.0;
    double y2 = 0.0;
    Vec3 eta_dual;

    double F(const Vec3& p_dual) const {
        const double a = params.alpha;
        const double pf = dot(p_dual, dphi);
        return std::sqrt((norm2(p_dual) - a * a * pf * pf) / y2);
    }
    double g(const Vec3& p1, const Vec3& p2) const {
        const double a = params.alpha;
        return (2 * params.k / y2) * (dot(p1, p2) - a * a * dot(p1, dphi) * dot(p2, dphi));
    }
};

inline KatokMetricAt katok_metric(const KatokParams& params, const SpherePoint& q,
                                  const Vec3& axis = {0, 0, 1}) {
    KatokMetricAt m;
    m.params = params;
    m.q = q.ambient;
    const Vec3 a = normalized(axis);
    m.dphi = cross(a, q.ambient);
    m.h = dot(a, q.ambient);
    m.r = params.r_of(m.h);
    m.y2 = params.y2_of(m.h);
    if (m.y2 <= 0) throw std::domain_error("katok_metric: y2 not positive");
    m.eta_dual = params.alpha * m.r * m.dphi;
    return m;
}

// ---------------------------------------------------------------------------
// Level identities.

struct LevelIdentity {
    double defect = 0.0;      // |H_{s,alpha}(q, p/F(p) - eta) - c|
    double rhs_margin = 0.0;  // r F(p^) - alpha p^(dphi) at p^ = p/F(p), must be > 0
};

inline LevelIdentity level_identity_defect(const KatokParams& params, const CotangentState& x,
                                           const Vec3& axis = {0, 0, 1}) {
    if (pnorm(x) < 1e-300) throw std::domain_error("level_identity_defect: zero covector");
    const KatokMetricAt m = katok_metric(params, x.q, axis);
    const double F = m.F(x.p_dual);
    const Vec3 phat = x.p_dual / F;
    const CotangentState shifted = cot_from_ambient(x.q.ambient, phat - m.eta_dual);
    LevelIdentity out;
    out.defect = std::abs(H_salpha(params.s, params.alpha, shifted, axis) - params.c);
    out.rhs_margin = m.r * m.F(phat) - params.alpha * dot(phat, m.dphi);
    return out;
}

/// Root of H(m) = target along a fibre ray, by bracketing bisection with a
/// Newton polish. H must be increasing through the crossing (fibrewise
/// convexity with H(0) < target).
inline double ray_level_radius(const std::function<double(double)>& H, double target,
                               double bracket_hint) {
    double lo = 0.0, hi = bracket_hint;
    int guard = 0;
    while (H(hi) < target) {
        hi *= 2;
        if (++guard > 200) throw std::runtime_error("ray_level_radius: no bracket");
    }
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        (H(mid) < target ? lo : hi) = mid;
    }
    double x = 0.5 * (lo + hi);
    for (int i = 0; i < 4; ++i) {
        const double fd = 1e-7 * std::max(1.0, x);
        const double d = (H(x + fd) - H(x - fd)) / (2 * fd);
        if (d == 0.0) break;
        const double step = (H(x) - target) / d;
        x -= step;
        if (std::abs(step) < 1e-15 * std::max(1.0, x)) break;
    }
    return x;
}

/// Radii along the fibre ray through the unit covector `dir` at q of the
/// kinetic level {H_g = k} and of the shifted level {H_{s,alpha}(., . - eta) = c}.
/// The two must coincide.
struct RadiusMatch {
    double kinetic_radius = 0.0;
    double shifted_radius = 0.0;
    double defect = 0.0;
};

inline RadiusMatch iso2_radius_match(const KatokParams& params, const SpherePoint& q,
                                     const Vec3& dir, const Vec3& axis = {0, 0, 1}) {
    const KatokMetricAt met = katok_metric(params, q, axis);
    const Vec3 u = normalized(dir - dot(dir, q.ambient) * q.ambient);
    const double hint = 10 * std::sqrt(2 * params.k + params.s * params.s);
    RadiusMatch out;
    out.kinetic_radius = ray_level_radius(
        [&](double m) {
            const double f = met.F(m * u);
            return params.k * f * f;
        },
        params.k, hint);
    out.shifted_radius = ray_level_radius(
        [&](double m) {
            const CotangentState st = cot_from_ambient(q.ambient, m * u - met.eta_dual);
            return H_salpha(params.s, params.alpha, st, axis);
        },
        params.c, hint);
    out.defect = std::abs(out.kinetic_radius - out.shifted_radius);
    return out;
}

// ---------------------------------------------------------------------------
// Appendix validators: positivity of y2 and of the root equation right-hand
// side, y1 = 0 for eta = alpha r beta, and recovery of F from the quadratic
// y2 F^2 + 2 y1 F - y0 = 0.

struct AppendixReport {
    double min_y2 = 0.0;
    double min_chain_gap = 0.0;    // y2 - s^2 (1/(1-alpha^2 w) - 1) > 0
    double max_y1_abs = 0.0;
    double max_quad_resid = 0.0;   // y2 F^2 + 2 y1 F - y0 with F from the norm formula
    double max_f_solve_dev = 0.0;  // | F_quadratic - F_formula |
    double min_rhs_margin = 0.0;   // r F(p) - alpha p(dphi)
    double min_weight = 0.0;       // |p|^2 (1 - alpha^2 w)^2

    bool ok(double y1_tol = 1e-10, double quad_tol = 1e-10) const {
        return min_y2 > 0 && min_chain_gap > 0 && max_y1_abs < y1_tol && max_quad_resid < quad_tol
            && max_f_solve_dev < quad_tol && min_rhs_margin > 0 && min_weight > 0;
    }
};

inline AppendixReport appendix_validate(const KatokParams& params, int n_theta = 512,
                                        int n_phi = 1024, int n_dirs = 8,
                                        const Vec3& axis = {0, 0, 1}) {
    const double s = params.s, alpha = params.alpha, c = params.c;
    AppendixReport rep;
    rep.min_y2 = rep.min_chain_gap = rep.min_rhs_margin = rep.min_weight = 1e300;
    for (int it = 0; it < n_theta; ++it) {
        const double theta = (it + 0.5) * M_PI / n_theta;
        for (int ip = 0; ip < n_phi; ++ip) {
            const double phi = (ip + 0.5) * 2 * M_PI / n_phi;
            const SpherePoint q = sphere_from_chart(Chart::A, theta, phi);
            const KatokMetricAt met = katok_metric(params, q, axis);
            const double w = norm2(met.dphi);
            rep.min_y2 = std::min(rep.min_y2, met.y2);
            rep.min_chain_gap = std::min(
                rep.min_chain_gap, met.y2 - s * s * (1.0 / (1.0 - alpha * alpha * w) - 1.0));
            const Vec3 e1 = partial_theta(q);
            const Vec3 e2 = normalized(partial_phi(q));
            for (int id = 0; id < n_dirs; ++id) {
                const double psi = (id + 0.5) * 2 * M_PI / n_dirs;
                const Vec3 p = std::cos(psi) * e1 + std::sin(psi) * e2;
                const double pf = dot(p, met.dphi);
                const double peta = dot(p, met.eta_dual);
                const double bracket = c + alpha * (alpha * met.r * w) - alpha * s * met.h;
                const double y0 = norm2(p) - alpha * alpha * pf * pf;
                const double y1 = peta - alpha * bracket * pf;
                const double y2 = bracket * bracket - norm2(met.eta_dual) - s * s;
                const double F = met.F(p);
                rep.max_y1_abs = std::max(rep.max_y1_abs, std::abs(y1));
                rep.max_quad_resid =
                    std::max(rep.max_quad_resid, std::abs(y2 * F * F + 2 * y1 * F - y0));
                // solve the quadratic with y1 as computed and compare with F
                const double f_solved = (-y1 + std::sqrt(y1 * y1 + y2 * y0)) / y2;
                rep.max_f_solve_dev = std::max(rep.max_f_solve_dev, std::abs(f_solved - F));
                rep.min_rhs_margin = std::min(rep.min_rhs_margin, met.r * F - alpha * pf);
                rep.min_weight =
                    std::min(rep.min_weight, norm2(p) * (1 - alpha * alpha * w) * (1 - alpha * alpha * w));
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Descriptor helpers for the full magnetic Katok system (g_{s,alpha,k},
// s mubar + d(alpha r beta)) at energy k.

struct MagneticKatokSystem {
    KatokParams params;
    Hamiltonian hamiltonian;   // kinetic energy of g_{s,alpha,k}
    MagneticForm sigma;        // s mubar + d(alpha r beta)
    double energy = 0.0;       // k
};

inline MagneticKatokSystem magnetic_katok_system(const KatokParams& params) {
    return {params, Hamiltonian::katok_kinetic(params), MagneticForm::katok(params), params.k};
}

} // namespace magsphere

#endif
