#ifndef MAGSPHERE_STATE_HPP
#define MAGSPHERE_STATE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "jet.hpp"
#include "linalg.hpp"
#include "sphere.hpp"

namespace magsphere {

/// A point of T*S^2. The covector p is stored through its gbar-dual tangent
/// vector (ambient, authoritative) together with the canonical chart
/// components (p_theta, p_phi) of the tagged chart.
struct CotangentState {
    SpherePoint q;
    Vec3 p_dual;            // tangent at q.ambient; p(w) = p_dual . w
    double p_theta = 0.0;   // p(d/dtheta)
    double p_phi = 0.0;     // p(d/dphi)
};

inline double pnorm(const CotangentState& x) { return norm(x.p_dual); }

inline CotangentState cot_from_ambient(const Vec3& q, const Vec3& p_raw, Chart chart) {
    CotangentState x;
    x.q = sphere_from_ambient(q, chart);
    x.p_dual = p_raw - dot(p_raw, x.q.ambient) * x.q.ambient;
    x.p_theta = dot(x.p_dual, partial_theta(x.q));
    x.p_phi = dot(x.p_dual, partial_phi(x.q));
    return x;
}

inline CotangentState cot_from_ambient(const Vec3& q, const Vec3& p_raw) {
    return cot_from_ambient(q, p_raw, canonical_chart(q));
}

inline CotangentState cot_from_chart(Chart chart, double theta, double phi, double p_theta,
                                     double p_phi) {
    CotangentState x;
    x.q = sphere_from_chart(chart, theta, phi);
    const double s2 = std::max(std::sin(theta) * std::sin(theta), 1e-300);
    x.p_dual = p_theta * partial_theta(x.q) + (p_phi / s2) * partial_phi(x.q);
    x.p_theta = p_theta;
    x.p_phi = p_phi;
    return x;
}

inline CotangentState force_chart(const CotangentState& x, Chart chart) {
    return cot_from_ambient(x.q.ambient, x.p_dual, chart);
}

/// Phase-space distance: Euclidean on the ambient (q, p_dual) pair.
inline double phase_distance(const CotangentState& a, const CotangentState& b) {
    return std::sqrt(norm2(a.q.ambient - b.q.ambient) + norm2(a.p_dual - b.p_dual));
}

// ---------------------------------------------------------------------------
// Chart coordinate view (theta, phi, p_theta, p_phi), used by the dynamics.

struct ChartCoords {
    Chart chart = Chart::A;
    Vec4 y{0, 0, 0, 0};  // theta, phi, p_theta, p_phi
};

inline ChartCoords to_coords(const CotangentState& x) {
    return {x.q.chart, {x.q.theta, x.q.phi, x.p_theta, x.p_phi}};
}

inline CotangentState from_coords(const ChartCoords& c) {
    return cot_from_chart(c.chart, c.y[0], c.y[1], c.y[2], c.y[3]);
}

// Jets of the ambient representation with respect to the four chart
// coordinates; the single source of closed-form derivatives.
struct AmbientJets {
    JetVec3 q;  // base point
    JetVec3 p;  // dual vector of the covector
};

inline AmbientJets ambient_jets(const ChartCoords& c) {
    const Jet th = Jet::var(c.y[0], 0);
    const Jet ph = Jet::var(c.y[1], 1);
    const Jet pth = Jet::var(c.y[2], 2);
    const Jet pph = Jet::var(c.y[3], 3);

    const Jet st = sin(th), ct = cos(th), cp = cos(ph), sp = sin(ph);
    // frame coordinates (e1, e2, e3 components); the chart frames are axis
    // permutations, so the ambient representation is a component shuffle
    const JetVec3 qf{st * cp, st * sp, ct};
    const JetVec3 dthf{ct * cp, ct * sp, -st};
    const JetVec3 dphf{-qf.y, qf.x, Jet(0.0)};  // e3 x q in frame coordinates
    const Jet uph = pph / (st * st);
    const JetVec3 pf = pth * dthf + uph * dphf;

    if (c.chart == Chart::A) return {qf, pf};
    // chart B frame is (y, z, x): frame components (f1,f2,f3) sit at
    // ambient (x,y,z) = (f3, f1, f2)
    return {{qf.z, qf.x, qf.y}, {pf.z, pf.x, pf.y}};
}

/// Tangent vector to T*S^2 in ambient form, subject to
/// dq.q = 0 and dq.p + q.dp = 0 for states on the bundle.
struct PhaseTangent {
    Vec3 dq, dp;
};

/// Push a chart-coordinate tangent (dtheta, dphi, dp_theta, dp_phi) to the
/// ambient representation using the exact chart jacobian.
inline PhaseTangent chart_tangent_to_ambient(const CotangentState& x, const Vec4& w) {
    const AmbientJets aj = ambient_jets(to_coords(x));
    PhaseTangent t;
    auto push = [&w](const Jet& j) {
        return j.d[0] * w[0] + j.d[1] * w[1] + j.d[2] * w[2] + j.d[3] * w[3];
    };
    t.dq = {push(aj.q.x), push(aj.q.y), push(aj.q.z)};
    t.dp = {push(aj.p.x), push(aj.p.y), push(aj.p.z)};
    return t;
}

// ---------------------------------------------------------------------------
// Cotangent lifts of isometries.

/// Lift of a proper rotation of 3-space to T*S^2: (q, p) -> (Rq, p o dR^-1),
/// i.e. (Rq, Rp) on dual vectors.
inline CotangentState isometry_lift(const Mat3& r, const CotangentState& x) {
    if (!is_proper_rotation(r)) throw std::invalid_argument("isometry_lift: not a proper rotation");
    return cot_from_ambient(r * x.q.ambient, r * x.p_dual);
}

} // namespace magsphere

#endif
