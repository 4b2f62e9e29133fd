#ifndef MAGSPHERE_PSI_HPP
#define MAGSPHERE_PSI_HPP

#include <cmath>
#include <stdexcept>

#include "hamiltonian.hpp"
#include "rng.hpp"
#include "state.hpp"

namespace magsphere {

// The symplectomorphism family Psi_s from ({|p| > s}, dlambda) onto
// ({|p| > 0}, dlambda - s pi* mubar), built from the fibre scaling flow
// Phi^Y and the rotated geodesic flow Phi^{H'}. The scaling and rotation
// profiles are
//   sin a_s(m) = -s/m   on (s, infty) -> (-pi/2, 0),
//   b_s(m) = sqrt(1 - s^2/m^2)        on (s, infty) -> (0, 1).

inline double psi_a(double s, double m) {
    if (m < s) throw std::domain_error("psi_a: m < s");
    return std::asin(std::clamp(-s / m, -1.0, 1.0));
}

inline double psi_b(double s, double m) {
    if (m < s) throw std::domain_error("psi_b: m < s");
    return std::sqrt(std::max(0.0, 1.0 - (s * s) / (m * m)));
}

/// Centre of the positive hemisphere bounded by the oriented great circle
/// through (q, p-dual).
inline Vec3 pi_center(const CotangentState& x) {
    const double m = pnorm(x);
    if (m < 1e-300) throw std::domain_error("pi_center: zero covector");
    return cross(x.q.ambient, x.p_dual) / m;
}

/// Fibre scaling Phi^Y_{log b}(q, p) = (q, b p).
inline CotangentState phi_Y(double logb, const CotangentState& x) {
    return cot_from_ambient(x.q.ambient, std::exp(logb) * x.p_dual);
}

/// Time-a point of the flow of H' = H/|p|. The base point moves at unit
/// angular speed along the great circle through q orthogonal to p-dual
/// (the one through the poles of the (q, p) circle); the fibre is parallel,
/// which in ambient form means p-dual is constant.
inline CotangentState phi_Hprime(double a, const CotangentState& x) {
    const double m = pnorm(x);
    if (m < 1e-300) throw std::domain_error("phi_Hprime: zero covector");
    const Vec3 pi = cross(x.q.ambient, x.p_dual) / m;
    const Vec3 q1 = std::cos(a) * x.q.ambient - std::sin(a) * pi;
    return cot_from_ambient(q1, x.p_dual);
}

/// Psi_s as the composition Phi^Y_{log b_s(|p|)} o Phi^{H'}_{a_s(|p|)},
/// extended continuously to {|p| = s} by (Pi(q, p), 0).
inline CotangentState psi_forward(double s, const CotangentState& x) {
    const double m = pnorm(x);
    if (m < s - 1e-9) throw std::domain_error("psi_forward: |p| < s");
    if (s == 0.0) return x;
    if (m <= s) return cot_from_ambient(pi_center(x), {0, 0, 0});
    return phi_Y(std::log(psi_b(s, m)), phi_Hprime(psi_a(s, m), x));
}

/// Psi_s through the explicit polar description: place the image at
/// colatitude theta(s) = arccos(s/|p|) from Pi(q, p) at the azimuth of q,
/// with covector of norm sqrt(|p|^2 - s^2) along +d/dphi of the Pi frame.
/// An independent code path, kept for cross-checking the composition.
inline CotangentState psi_forward_polar(double s, const CotangentState& x) {
    const double m = pnorm(x);
    if (m < s - 1e-9) throw std::domain_error("psi_forward_polar: |p| < s");
    if (s == 0.0) return x;
    const Vec3 pi = pi_center(x);
    // polar frame about pi: e1 towards q, e2 = pi x e1
    const Vec3 e1 = normalized(x.q.ambient - dot(x.q.ambient, pi) * pi);
    const Vec3 e2 = cross(pi, e1);
    const double azim = 0.0;  // q sits at azimuth 0 of this frame by construction
    const double theta_s = std::acos(std::clamp(s / m, -1.0, 1.0));
    const double st = std::sin(theta_s), ct = std::cos(theta_s);
    const Vec3 q1 = st * std::cos(azim) * e1 + st * std::sin(azim) * e2 + ct * pi;
    const Vec3 dphi_unit = normalized(cross(pi, q1));
    return cot_from_ambient(q1, std::sqrt(std::max(0.0, m * m - s * s)) * dphi_unit);
}

/// Inverse of Psi_s on {|p| > 0}: with u = p-dual/|p|, M = sqrt(|p|^2+s^2)
/// and axis Pi' = (s/M) q + (|p|/M) (q x u), the preimage sits on the
/// Pi'-equator at the azimuth of q with covector of norm M along +d/dphi.
inline CotangentState psi_inverse(double s, const CotangentState& x) {
    const double n = pnorm(x);
    if (n < 1e-300) throw std::domain_error("psi_inverse: zero covector");
    if (s == 0.0) return x;
    const Vec3 u = x.p_dual / n;
    const double m = std::sqrt(n * n + s * s);
    const Vec3 pi = (s / m) * x.q.ambient + (n / m) * cross(x.q.ambient, u);
    const Vec3 qe = normalized(x.q.ambient - dot(x.q.ambient, pi) * pi);
    return cot_from_ambient(qe, m * cross(pi, qe));
}

// ---------------------------------------------------------------------------
// Numerical verification of the defining properties.

/// max over random phase tangents w of |lambda_s(dPsi_s w) - lambda(w)|/(1+|w|),
/// with dPsi_s by central finite differences in chart coordinates.
inline double pullback_defect(double s, const CotangentState& x, int trials, Rng& rng) {
    const double m = pnorm(x);
    if (m - s < 1e-4)
        throw std::domain_error("pullback_defect: state too close to the domain boundary");
    const double h = 1e-5;
    const ChartCoords c = to_coords(x);

    // finite-difference images of the coordinate perturbations, ambient form
    Vec3 dq_cols[4], dp_cols[4];
    for (int i = 0; i < 4; ++i) {
        ChartCoords cp = c, cm = c;
        cp.y[i] += h;
        cm.y[i] -= h;
        const CotangentState ip = psi_forward(s, from_coords(cp));
        const CotangentState im = psi_forward(s, from_coords(cm));
        dq_cols[i] = (ip.q.ambient - im.q.ambient) / (2 * h);
        dp_cols[i] = (ip.p_dual - im.p_dual) / (2 * h);
    }

    const CotangentState img = psi_forward(s, x);
    double worst = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        Vec4 w{};
        for (double& wi : w) wi = rng.range(-1, 1);
        PhaseTangent dw{{0, 0, 0}, {0, 0, 0}};
        for (int i = 0; i < 4; ++i) {
            dw.dq += w[i] * dq_cols[i];
            dw.dp += w[i] * dp_cols[i];
        }
        const double lhs = one_forms(img, dw, s).lambda_s;
        const double rhs = one_forms(x, chart_tangent_to_ambient(x, w)).lambda;
        worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + norm4(w)));
    }
    return worst;
}

/// Consequence check on the 2-forms:
/// max |omega_{s mubar}(dPsi w1, dPsi w2) - omega_0(w1, w2)| over random pairs.
inline double omega_pullback_defect(double s, const CotangentState& x, int trials, Rng& rng) {
    const double m = pnorm(x);
    if (m - s < 1e-4)
        throw std::domain_error("omega_pullback_defect: state too close to the domain boundary");
    const double h = 1e-5;
    const ChartCoords c = to_coords(x);
    const CotangentState img = psi_forward(s, x);
    const Chart tchart = img.q.chart;

    // Jacobian columns in the (fixed) image chart, phi differences unwrapped.
    Vec4 cols[4];
    for (int i = 0; i < 4; ++i) {
        ChartCoords cp = c, cm = c;
        cp.y[i] += h;
        cm.y[i] -= h;
        const ChartCoords ip = to_coords(force_chart(psi_forward(s, from_coords(cp)), tchart));
        const ChartCoords im = to_coords(force_chart(psi_forward(s, from_coords(cm)), tchart));
        for (int j = 0; j < 4; ++j) {
            double d = ip.y[j] - im.y[j];
            if (j == 1) {  // azimuth difference
                while (d > M_PI) d -= 2 * M_PI;
                while (d < -M_PI) d += 2 * M_PI;
            }
            cols[i][j] = d / (2 * h);
        }
    }

    const MagneticForm sig_s = MagneticForm::uniform(s);
    const MagneticForm sig_0 = MagneticForm::uniform(0);
    double worst = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        Vec4 w1{}, w2{};
        for (int i = 0; i < 4; ++i) {
            w1[i] = rng.range(-1, 1);
            w2[i] = rng.range(-1, 1);
        }
        Vec4 dw1{}, dw2{};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                dw1[j] += w1[i] * cols[i][j];
                dw2[j] += w2[i] * cols[i][j];
            }
        const double lhs = omega_pairing(sig_s, img, dw1, dw2);
        const double rhs = omega_pairing(sig_0, x, w1, w2);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

/// Phase-space distance between Psi_s(lift(R) x) and lift(R)(Psi_s x).
inline double equivariance_defect(double s, const Mat3& r, const CotangentState& x) {
    const double m = pnorm(x);
    if (m < s - 1e-12) throw std::domain_error("equivariance_defect: |p| < s");
    return phase_distance(psi_forward(s, isometry_lift(r, x)), isometry_lift(r, psi_forward(s, x)));
}

} // namespace magsphere

#endif
