#ifndef MAGSPHERE_LINALG_HPP
#define MAGSPHERE_LINALG_HPP

#include <array>
#include <cmath>
#include <stdexcept>

namespace magsphere {

using Vec4 = std::array<double, 4>;
using Mat4 = std::array<std::array<double, 4>, 4>;

inline Vec4 operator+(const Vec4& a, const Vec4& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}
inline Vec4 operator-(const Vec4& a, const Vec4& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]};
}
inline Vec4 operator*(double s, const Vec4& a) { return {s * a[0], s * a[1], s * a[2], s * a[3]}; }
inline double dot4(const Vec4& a, const Vec4& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}
inline double norm4(const Vec4& a) { return std::sqrt(dot4(a, a)); }

// Gaussian elimination with partial pivoting.
inline Vec4 solve4(Mat4 a, Vec4 b) {
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-300) throw std::runtime_error("solve4: singular matrix");
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        const double inv = 1.0 / a[col][col];
        for (int r = col + 1; r < 4; ++r) {
            const double f = a[r][col] * inv;
            if (f == 0.0) continue;
            for (int c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    Vec4 x{};
    for (int r = 3; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < 4; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return x;
}

inline std::array<double, 2> solve2(double a, double b, double c, double d, double e, double f) {
    // [a b; c d] x = [e; f]
    const double det = a * d - b * c;
    if (std::abs(det) < 1e-300) throw std::runtime_error("solve2: singular matrix");
    return {(e * d - b * f) / det, (a * f - e * c) / det};
}

// Orthonormal basis of the orthogonal complement of span{g1, g2} in R^4.
// Gram-Schmidt over the coordinate directions, keeping the two most
// independent results.
inline std::array<Vec4, 2> nullspace2(Vec4 g1, Vec4 g2) {
    const double n1 = norm4(g1);
    if (n1 < 1e-300) throw std::runtime_error("nullspace2: zero gradient");
    g1 = (1.0 / n1) * g1;
    g2 = g2 - dot4(g2, g1) * g1;
    const double n2 = norm4(g2);
    if (n2 < 1e-300) throw std::runtime_error("nullspace2: dependent gradients");
    g2 = (1.0 / n2) * g2;

    std::array<Vec4, 2> out{};
    int found = 0;
    for (int i = 0; i < 4 && found < 2; ++i) {
        Vec4 e{};
        e[i] = 1.0;
        e = e - dot4(e, g1) * g1;
        e = e - dot4(e, g2) * g2;
        if (found == 1) e = e - dot4(e, out[0]) * out[0];
        const double n = norm4(e);
        if (n > 1e-6) out[found++] = (1.0 / n) * e;
    }
    if (found < 2) throw std::runtime_error("nullspace2: failed to build basis");
    return out;
}

} // namespace magsphere

#endif
