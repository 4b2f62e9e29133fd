#ifndef MAGSPHERE_SPHERE_HPP
#define MAGSPHERE_SPHERE_HPP

#include <cmath>
#include <stdexcept>
#include <utility>

#include "vec3.hpp"

namespace magsphere {

// Conventions used throughout:
//   * the round metric has curvature 1, gbar(u,w) = u.w in ambient form;
//   * the area form is mubar(u,w) = q.(u x w), so the fibrewise rotation
//     jrot(u) = q x u satisfies mubar(u, jrot u) = |u|^2 > 0;
//   * polar charts are positively oriented: chart A is polar about +z
//     (frame x,y,z), chart B about +x (frame y,z,x).

enum class Chart { A, B };

inline constexpr double kPoleTol = 1e-9;          // degenerate-azimuth flag
inline constexpr double kChartBandLo = M_PI / 8;  // canonical tag band for chart A

namespace detail {
inline void chart_frame(Chart c, Vec3& e1, Vec3& e2, Vec3& e3) {
    if (c == Chart::A) {
        e1 = {1, 0, 0};
        e2 = {0, 1, 0};
        e3 = {0, 0, 1};
    } else {
        e1 = {0, 1, 0};
        e2 = {0, 0, 1};
        e3 = {1, 0, 0};
    }
}
} // namespace detail

struct SpherePoint {
    Vec3 ambient;               // unit vector; authoritative representation
    Chart chart = Chart::A;
    double theta = 0.0;         // colatitude in [0, pi] for the tagged chart
    double phi = 0.0;           // azimuth in [0, 2pi)
    bool pole_degenerate = false;  // azimuth undefined (within kPoleTol of the chart axis)
};

inline double wrap_2pi(double a) {
    a = std::fmod(a, 2 * M_PI);
    return a < 0 ? a + 2 * M_PI : a;
}

inline Chart canonical_chart(const Vec3& q) {
    const double theta_a = std::acos(std::clamp(q.z, -1.0, 1.0));
    return (theta_a >= kChartBandLo && theta_a <= M_PI - kChartBandLo) ? Chart::A : Chart::B;
}

inline SpherePoint sphere_from_ambient(const Vec3& q_raw, Chart chart) {
    const double n = norm(q_raw);
    if (std::abs(n - 1.0) > 1e-6) throw std::invalid_argument("sphere point: not a unit vector");
    const Vec3 q = q_raw / n;
    Vec3 e1, e2, e3;
    detail::chart_frame(chart, e1, e2, e3);
    SpherePoint p;
    p.ambient = q;
    p.chart = chart;
    const double c3 = std::clamp(dot(q, e3), -1.0, 1.0);
    p.theta = std::acos(c3);
    const double sx = dot(q, e1), sy = dot(q, e2);
    if (std::sqrt(sx * sx + sy * sy) < kPoleTol) {
        p.phi = 0.0;
        p.pole_degenerate = true;
    } else {
        p.phi = wrap_2pi(std::atan2(sy, sx));
    }
    return p;
}

inline SpherePoint sphere_from_ambient(const Vec3& q) {
    return sphere_from_ambient(q, canonical_chart(q));
}

inline SpherePoint sphere_from_chart(Chart chart, double theta, double phi) {
    Vec3 e1, e2, e3;
    detail::chart_frame(chart, e1, e2, e3);
    const double st = std::sin(theta), ct = std::cos(theta);
    SpherePoint p;
    p.ambient = st * std::cos(phi) * e1 + st * std::sin(phi) * e2 + ct * e3;
    p.chart = chart;
    p.theta = theta;
    p.phi = wrap_2pi(phi);
    p.pole_degenerate = std::abs(st) < kPoleTol;
    return p;
}

inline SpherePoint chart_convert(const SpherePoint& p, Chart target) {
    return sphere_from_ambient(p.ambient, target);
}

// Chart coordinate fields at a point: d(theta), d(phi) duals.
// partial_theta is the unit meridian vector, partial_phi = e3 x q.
inline Vec3 partial_theta(const SpherePoint& p) {
    Vec3 e1, e2, e3;
    detail::chart_frame(p.chart, e1, e2, e3);
    const double st = std::sin(p.theta), ct = std::cos(p.theta);
    return ct * std::cos(p.phi) * e1 + ct * std::sin(p.phi) * e2 - st * e3;
}

inline Vec3 partial_phi(const SpherePoint& p) {
    Vec3 e1, e2, e3;
    detail::chart_frame(p.chart, e1, e2, e3);
    return cross(e3, p.ambient);
}

struct TangentVector {
    SpherePoint base;
    Vec3 ambient;       // orthogonal to base.ambient
    double u_theta = 0.0;  // chart components: ambient = u_theta d/dtheta + u_phi d/dphi
    double u_phi = 0.0;
};

inline TangentVector tangent_from_ambient(const SpherePoint& base, const Vec3& v_raw) {
    TangentVector t;
    t.base = base;
    t.ambient = v_raw - dot(v_raw, base.ambient) * base.ambient;
    t.u_theta = dot(t.ambient, partial_theta(base));
    const double s2 = std::max(std::sin(base.theta) * std::sin(base.theta), 1e-300);
    t.u_phi = dot(t.ambient, partial_phi(base)) / s2;
    return t;
}

inline TangentVector tangent_from_chart(const SpherePoint& base, double u_theta, double u_phi) {
    TangentVector t;
    t.base = base;
    t.u_theta = u_theta;
    t.u_phi = u_phi;
    t.ambient = u_theta * partial_theta(base) + u_phi * partial_phi(base);
    return t;
}

/// Round metric and area form evaluated in ambient form.
inline std::pair<double, double> round_pairings(const SpherePoint& p, const TangentVector& u,
                                                const TangentVector& w) {
    if (norm(u.base.ambient - p.ambient) > 1e-9 || norm(w.base.ambient - p.ambient) > 1e-9)
        throw std::invalid_argument("round_pairings: mismatched base points");
    return {dot(u.ambient, w.ambient), triple(p.ambient, u.ambient, w.ambient)};
}

// Chart expressions gbar = dtheta^2 + sin^2 dphi^2, mubar = sin dtheta^dphi;
// kept separate so tests can confirm the two routes agree.
inline double round_metric_chart(const SpherePoint& p, const TangentVector& u, const TangentVector& w) {
    const double s2 = std::sin(p.theta) * std::sin(p.theta);
    return u.u_theta * w.u_theta + s2 * u.u_phi * w.u_phi;
}
inline double round_area_chart(const SpherePoint& p, const TangentVector& u, const TangentVector& w) {
    return std::sin(p.theta) * (u.u_theta * w.u_phi - u.u_phi * w.u_theta);
}

/// Fibrewise rotation by +pi/2: (u, jrot u) positively oriented for mubar.
inline TangentVector jrot(const TangentVector& u) {
    return tangent_from_ambient(u.base, cross(u.base.ambient, u.ambient));
}

/// Axis frame defining theta, phi, the rotation field, beta and h = cos(theta).
struct AxisFrame {
    Vec3 axis{0, 0, 1};
};

struct AxisFields {
    TangentVector rot;  // the rotation field d/dphi at p (ambient: axis x p)
    double h = 0.0;     // axis . p  (= cos theta about the axis)
    // beta is the gbar-dual of rot: beta(w) = rot.ambient . w
    double beta(const TangentVector& w) const { return dot(rot.ambient, w.ambient); }
    double beta(const Vec3& w) const { return dot(rot.ambient, w); }
};

inline AxisFields axis_fields(const AxisFrame& frame, const SpherePoint& p) {
    AxisFields f;
    f.rot = tangent_from_ambient(p, cross(normalized(frame.axis), p.ambient));
    f.h = dot(normalized(frame.axis), p.ambient);
    return f;
}

} // namespace magsphere

#endif
