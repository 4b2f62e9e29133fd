#ifndef MAGSPHERE_KATOK_PARAMS_HPP
#define MAGSPHERE_KATOK_PARAMS_HPP

#include <cmath>
#include <stdexcept>

namespace magsphere {

/// Parameter pack (s, alpha, k) of the magnetic Katok construction with the
/// derived quantities
///   c    = sqrt(2k + s^2) + alpha s,
///   r(h) = (c - alpha s h) / (1 - alpha^2 (1 - h^2)),   h = cos(theta),
///   y2(h) = (1 - alpha^2 (1 - h^2)) r(h)^2 - s^2.
/// The shifted 1-form is eta = alpha r beta and the cometric multiplier is
/// 2k / y2.
struct KatokParams {
    double s = 0.0;
    double alpha = 0.0;
    double k = 0.0;
    double c = 0.0;

    KatokParams() = default;
    KatokParams(double s_, double alpha_, double k_) : s(s_), alpha(alpha_), k(k_) {
        if (s < 0) throw std::invalid_argument("KatokParams: s must be >= 0");
        if (alpha < 0 || alpha >= 1) throw std::invalid_argument("KatokParams: alpha must be in [0,1)");
        if (k <= 0) throw std::invalid_argument("KatokParams: k must be > 0");
        c = std::sqrt(2 * k + s * s) + alpha * s;
        if (c <= s * (1 + alpha))
            throw std::invalid_argument("KatokParams: level constant must exceed s(1+alpha)");
    }

    template <class T>
    T r_of(T h) const {
        return (c - (alpha * s) * h) / (1.0 - alpha * alpha * (1.0 - h * h));
    }

    double dr_dh(double h) const {
        const double n = c - alpha * s * h;
        const double d = 1.0 - alpha * alpha * (1.0 - h * h);
        return (-alpha * s * d - 2.0 * alpha * alpha * h * n) / (d * d);
    }

    template <class T>
    T y2_of(T h) const {
        const T r = r_of(h);
        return (1.0 - alpha * alpha * (1.0 - h * h)) * r * r - s * s;
    }

    /// Density of sigma = s mubar + d(alpha r beta) with respect to mubar:
    /// d(f beta) = (2 h f - (1-h^2) f') mubar for axisymmetric f.
    double sigma_density(double h) const {
        return s + alpha * (2.0 * h * r_of(h) - (1.0 - h * h) * dr_dh(h));
    }

    double eta_scale(double h) const { return alpha * r_of(h); }
};

} // namespace magsphere

#endif
