#ifndef MAGSPHERE_WFAMILY_HPP
#define MAGSPHERE_WFAMILY_HPP

#include <array>
#include <cmath>
#include <stdexcept>

#include "katok.hpp"
#include "rng.hpp"

namespace magsphere {

/// The fibrewise convex family H_s = (R_s - s)/(1 + eps (s - Omega_s)) on
/// {|p| < delta}, delta^2 = 1/eps^2 + 2s/eps: delta is exactly the fibre
/// radius at which the denominator first vanishes. The membership claim in
/// the convex class holds up to shrinking the domain; the shrink factor is
/// exposed as a knob.
struct WParams {
    double s = 1.0;
    double eps = 1.0;
    double delta = 0.0;
    double shrink = 0.5;

    WParams() { delta = std::sqrt(1.0 / (eps * eps) + 2 * s / eps); }
    WParams(double s_, double eps_, double shrink_ = 0.5) : s(s_), eps(eps_), shrink(shrink_) {
        if (s <= 0 || eps <= 0) throw std::invalid_argument("WParams: s and eps must be > 0");
        if (shrink <= 0 || shrink > 1) throw std::invalid_argument("WParams: shrink must be in (0,1]");
        delta = std::sqrt(1.0 / (eps * eps) + 2 * s / eps);
    }
};

inline double w_value(const WParams& wp, const CotangentState& x, const Vec3& axis = {0, 0, 1}) {
    if (pnorm(x) >= wp.delta) throw std::domain_error("w_value: |p| >= delta");
    const double denom = 1.0 + wp.eps * (wp.s - Omega_s(wp.s, x, axis));
    return (R_s(wp.s, x) - wp.s) / denom;
}

inline Hamiltonian w_hamiltonian(const WParams& wp) { return Hamiltonian::w_family(wp.s, wp.eps); }

/// Expected vertical Hessian at the zero section, as a multiple of the
/// round cometric: gbar_q / (s (1 + eps s (1 - cos theta))).
inline double vertical_hessian_expected(const WParams& wp, const SpherePoint& q,
                                        const Vec3& axis = {0, 0, 1}) {
    const double h = dot(normalized(axis), q.ambient);
    return 1.0 / (wp.s * (1.0 + wp.eps * wp.s * (1.0 - h)));
}

/// Fibre Hessian of H_s at (q, 0) by second differences, in the orthonormal
/// dual frame (d/dtheta, d/dphi / sin) of the axis chart at q.
inline std::array<std::array<double, 2>, 2> vertical_hessian_fd(const WParams& wp,
                                                                const SpherePoint& q,
                                                                double step = 1e-3,
                                                                const Vec3& axis = {0, 0, 1}) {
    const Vec3 a = normalized(axis);
    Vec3 e1 = cross(a, q.ambient);
    if (norm(e1) < 1e-12) e1 = cross(Vec3{1, 0, 0} + Vec3{0, 0.31, 0.17}, q.ambient);
    e1 = normalized(e1);
    const Vec3 e2 = cross(q.ambient, e1);
    auto H = [&](double u, double v) {
        return w_value(wp, cot_from_ambient(q.ambient, u * e1 + v * e2), axis);
    };
    std::array<std::array<double, 2>, 2> hess{};
    const double t = step;
    const double h00 = H(0, 0);
    hess[0][0] = (H(t, 0) + H(-t, 0) - 2 * h00) / (t * t);
    hess[1][1] = (H(0, t) + H(0, -t) - 2 * h00) / (t * t);
    hess[0][1] = hess[1][0] =
        (H(t, t) - H(t, -t) - H(-t, t) + H(-t, -t)) / (4 * t * t);
    return hess;
}

/// The level {H_s = k} coincides with {H_{s,eps k} = s(1+eps k) + k}. Both
/// fibre-ray radii are found independently (bisection plus Newton polish)
/// and their difference is returned.
struct WLevelMatch {
    double w_radius = 0.0;
    double katok_radius = 0.0;
    double defect = 0.0;
};

inline WLevelMatch w_level_identity_defect(const WParams& wp, double k, const SpherePoint& q,
                                           const Vec3& dir, const Vec3& axis = {0, 0, 1}) {
    if (k <= 0) throw std::invalid_argument("w_level_identity_defect: k must be > 0");
    const Vec3 u = normalized(dir - dot(dir, q.ambient) * q.ambient);
    const double hint = std::sqrt(std::max(2 * wp.s * k, k * k));
    WLevelMatch out;
    out.w_radius = ray_level_radius(
        [&](double m) { return w_value(wp, cot_from_ambient(q.ambient, m * u), axis); }, k, hint);
    if (out.w_radius >= wp.delta)
        throw std::domain_error("w_level_identity_defect: level escapes {|p| < delta}");
    const double alpha = wp.eps * k;
    const double target = wp.s * (1 + alpha) + k;
    out.katok_radius = ray_level_radius(
        [&](double m) {
            return H_salpha(wp.s, alpha, cot_from_ambient(q.ambient, m * u), axis);
        },
        target, hint);
    out.defect = std::abs(out.w_radius - out.katok_radius);
    return out;
}

/// Diagnostic for the domain-shrinking claim: the largest k for which the
/// level {H_s = k} stays inside the shrunk domain {|p| < shrink delta} AND
/// the sampled fibre Hessians on the level body stay positive definite
/// (fibrewise convexity genuinely fails far out, which is why the class
/// membership holds only after shrinking).
struct WConvexityReport {
    double k_max = 0.0;
    double max_level_radius = 0.0;
    double min_hessian_eig = 0.0;
};

inline WConvexityReport w_max_convex_k(const WParams& wp, int samples = 64,
                                       std::uint64_t rng_seed = 0, const Vec3& axis = {0, 0, 1}) {
    Rng rng(rng_seed);
    std::vector<SpherePoint> qs;
    std::vector<Vec3> dirs;
    for (int i = 0; i < samples; ++i) {
        const Vec3 q = rng.unit_vec3();
        qs.push_back(sphere_from_ambient(q));
        dirs.push_back(normalized(cross(q, rng.unit_vec3())));
    }
    auto ray_radius = [&](int i, double k) {
        return ray_level_radius(
            [&](double m) {
                // treat the boundary skin as outside: the bisection may
                // converge onto the domain jump itself
                if (m >= wp.delta * (1.0 - 1e-9)) return 1e12;
                return w_value(wp, cot_from_ambient(qs[i].ambient, m * dirs[i]), axis);
            },
            k, std::sqrt(2 * wp.s * k));
    };
    auto min_eig_at = [&](int i, double m) {
        const Vec3 q = qs[i].ambient;
        const Vec3 e1 = dirs[i];
        const Vec3 e2 = cross(q, e1);
        const Vec3 p0 = m * dirs[i];
        auto H = [&](double u, double v) {
            return w_value(wp, cot_from_ambient(q, p0 + u * e1 + v * e2), axis);
        };
        const double t = 1e-4 * std::max(1.0, m);
        const double h00 = H(0, 0);
        const double a = (H(t, 0) + H(-t, 0) - 2 * h00) / (t * t);
        const double d = (H(0, t) + H(0, -t) - 2 * h00) / (t * t);
        const double b = (H(t, t) - H(t, -t) - H(-t, t) + H(-t, -t)) / (4 * t * t);
        const double tr = a + d, det = a * d - b * b;
        return 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4 * det)));
    };
    struct Probe {
        double radius = 0.0;
        double eig = 0.0;
        bool ok = false;
    };
    auto probe = [&](double k) {
        Probe p;
        p.eig = 1e300;
        for (int i = 0; i < samples; ++i) {
            const double rad = ray_radius(i, k);
            p.radius = std::max(p.radius, rad);
            if (rad >= wp.shrink * wp.delta) return p;
            for (double f : {0.35, 0.65, 0.95})
                p.eig = std::min(p.eig, min_eig_at(i, f * rad));
        }
        p.ok = p.eig > 0;
        return p;
    };
    double klo = 1e-9, khi = 1.0;
    while (probe(khi).ok && khi < 1e6) khi *= 2;
    for (int i = 0; i < 45; ++i) {
        const double km = 0.5 * (klo + khi);
        (probe(km).ok ? klo : khi) = km;
    }
    const Probe final_probe = probe(klo);
    WConvexityReport rep;
    rep.k_max = klo;
    rep.max_level_radius = final_probe.radius;
    rep.min_hessian_eig = final_probe.eig;
    return rep;
}

} // namespace magsphere

#endif
