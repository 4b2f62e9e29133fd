#ifndef MAGSPHERE_ELLIPSOID_HPP
#define MAGSPHERE_ELLIPSOID_HPP

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace magsphere {

/// Point of the ellipsoid E_alpha = {(1+alpha)|z1|^2/2 + (1-alpha)|z2|^2/2 = 1}
/// in C^2 with the standard Liouville form.
struct EllipsoidState {
    std::complex<double> z1, z2;
    double alpha = 0.0;

    double constraint() const {
        return 0.5 * (1 + alpha) * std::norm(z1) + 0.5 * (1 - alpha) * std::norm(z2);
    }
};

inline EllipsoidState ellipsoid_state(std::complex<double> z1, std::complex<double> z2,
                                      double alpha) {
    EllipsoidState s{z1, z2, alpha};
    if (std::abs(s.constraint() - 1.0) > 1e-9)
        throw std::invalid_argument("ellipsoid_state: point not on E_alpha");
    return s;
}

/// Reeb flow of the restricted Liouville form:
/// z1 -> e^{i(1+alpha)t} z1, z2 -> e^{i(1-alpha)t} z2.
inline EllipsoidState reeb_flow(const EllipsoidState& s, double t) {
    if (std::abs(s.constraint() - 1.0) > 1e-9)
        throw std::invalid_argument("reeb_flow: point not on E_alpha");
    const std::complex<double> i(0, 1);
    return {std::exp(i * ((1 + s.alpha) * t)) * s.z1, std::exp(i * ((1 - s.alpha) * t)) * s.z2,
            s.alpha};
}

/// lambda_{C^2} evaluated on the Reeb velocity, 1/2 sum (x dy - y dx);
/// must be 1 on E_alpha.
inline double liouville_on_velocity(const EllipsoidState& s) {
    const std::complex<double> i(0, 1);
    const std::complex<double> v1 = i * (1 + s.alpha) * s.z1;
    const std::complex<double> v2 = i * (1 - s.alpha) * s.z2;
    auto pair = [](std::complex<double> z, std::complex<double> v) {
        return 0.5 * (z.real() * v.imag() - z.imag() * v.real());
    };
    return pair(s.z1, v1) + pair(s.z2, v2);
}

struct ReebOrbit {
    int axis = 0;  // 1: {z2 = 0}, 2: {z1 = 0}
    double period = 0.0;
    EllipsoidState representative;
};

/// The two axis circles with periods 2 pi / (1 +- alpha); for irrational
/// alpha these are the only periodic orbits.
inline std::array<ReebOrbit, 2> reeb_periodic_orbits(double alpha) {
    if (alpha <= 0 || alpha >= 1) throw std::invalid_argument("reeb_periodic_orbits: alpha in (0,1)");
    ReebOrbit o1{1, 2 * M_PI / (1 + alpha),
                 EllipsoidState{std::sqrt(2.0 / (1 + alpha)), 0.0, alpha}};
    ReebOrbit o2{2, 2 * M_PI / (1 - alpha),
                 EllipsoidState{0.0, std::sqrt(2.0 / (1 - alpha)), alpha}};
    return {o1, o2};
}

struct ReturnScan {
    double min_defect = 0.0;
    double t_at_min = 0.0;
};

/// Distance of the trajectory through s back to s, minimised over
/// t in [t_min, t_max]. For the axis circles this hits zero at the period;
/// an irrational-slope torus orbit stays away from zero.
inline ReturnScan return_scan(const EllipsoidState& s, double t_max, double t_min = 0.1,
                              double dt = 1e-3) {
    const double r1 = std::norm(s.z1), r2 = std::norm(s.z2);
    const double w1 = 1 + s.alpha, w2 = 1 - s.alpha;
    auto defect2 = [&](double t) {
        const double a = 2 * std::sin(0.5 * w1 * t);
        const double b = 2 * std::sin(0.5 * w2 * t);
        return r1 * a * a + r2 * b * b;  // |z(t) - z(0)|^2
    };
    ReturnScan out{1e300, t_min};
    for (double t = t_min; t <= t_max; t += dt) {
        const double d2 = defect2(t);
        if (d2 < out.min_defect) {
            out.min_defect = d2;
            out.t_at_min = t;
        }
    }
    // local parabolic refine
    const double t0 = out.t_at_min;
    double lo = std::max(t_min, t0 - dt), hi = std::min(t_max, t0 + dt);
    for (int i = 0; i < 60; ++i) {
        const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
        if (defect2(m1) < defect2(m2))
            hi = m2;
        else
            lo = m1;
    }
    const double tb = 0.5 * (lo + hi);
    if (defect2(tb) < out.min_defect) {
        out.min_defect = defect2(tb);
        out.t_at_min = tb;
    }
    out.min_defect = std::sqrt(out.min_defect);
    return out;
}

} // namespace magsphere

#endif
