#ifndef MAGSPHERE_JET_HPP
#define MAGSPHERE_JET_HPP

#include <array>
#include <cmath>

namespace magsphere {

/// First-order jet in the four canonical chart coordinates (theta, phi,
/// p_theta, p_phi). Carries a value and its exact gradient through all
/// arithmetic, so every Hamiltonian variant gets closed-form partials from
/// one mechanism.
struct Jet {
    double v = 0.0;
    std::array<double, 4> d{0, 0, 0, 0};

    Jet() = default;
    Jet(double value) : v(value) {}
    static Jet var(double value, int i) {
        Jet j(value);
        j.d[i] = 1.0;
        return j;
    }

    Jet operator-() const {
        Jet r(-v);
        for (int i = 0; i < 4; ++i) r.d[i] = -d[i];
        return r;
    }
};

inline Jet operator+(const Jet& a, const Jet& b) {
    Jet r(a.v + b.v);
    for (int i = 0; i < 4; ++i) r.d[i] = a.d[i] + b.d[i];
    return r;
}
inline Jet operator-(const Jet& a, const Jet& b) {
    Jet r(a.v - b.v);
    for (int i = 0; i < 4; ++i) r.d[i] = a.d[i] - b.d[i];
    return r;
}
inline Jet operator*(const Jet& a, const Jet& b) {
    Jet r(a.v * b.v);
    for (int i = 0; i < 4; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return r;
}
inline Jet operator/(const Jet& a, const Jet& b) {
    Jet r(a.v / b.v);
    const double ib2 = 1.0 / (b.v * b.v);
    for (int i = 0; i < 4; ++i) r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) * ib2;
    return r;
}

inline Jet operator+(const Jet& a, double c) { return a + Jet(c); }
inline Jet operator+(double c, const Jet& a) { return Jet(c) + a; }
inline Jet operator-(const Jet& a, double c) { return a - Jet(c); }
inline Jet operator-(double c, const Jet& a) { return Jet(c) - a; }
inline Jet operator*(const Jet& a, double c) { return a * Jet(c); }
inline Jet operator*(double c, const Jet& a) { return Jet(c) * a; }
inline Jet operator/(const Jet& a, double c) { return a / Jet(c); }
inline Jet operator/(double c, const Jet& a) { return Jet(c) / a; }

inline Jet sin(const Jet& a) {
    Jet r(std::sin(a.v));
    const double c = std::cos(a.v);
    for (int i = 0; i < 4; ++i) r.d[i] = c * a.d[i];
    return r;
}
inline Jet cos(const Jet& a) {
    Jet r(std::cos(a.v));
    const double s = -std::sin(a.v);
    for (int i = 0; i < 4; ++i) r.d[i] = s * a.d[i];
    return r;
}
inline Jet sqrt(const Jet& a) {
    const double s = std::sqrt(a.v);
    Jet r(s);
    const double f = 0.5 / s;
    for (int i = 0; i < 4; ++i) r.d[i] = f * a.d[i];
    return r;
}
inline Jet sqr(const Jet& a) { return a * a; }

/// 3-vector of jets; enough vector algebra for the chart maps.
struct JetVec3 {
    Jet x, y, z;
};

inline JetVec3 operator+(const JetVec3& a, const JetVec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline JetVec3 operator-(const JetVec3& a, const JetVec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline JetVec3 operator*(const Jet& s, const JetVec3& a) { return {s * a.x, s * a.y, s * a.z}; }
inline Jet dot(const JetVec3& a, const JetVec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline JetVec3 cross(const JetVec3& a, const JetVec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

} // namespace magsphere

#endif
