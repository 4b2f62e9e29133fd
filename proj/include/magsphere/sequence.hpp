#ifndef MAGSPHERE_SEQUENCE_HPP
#define MAGSPHERE_SEQUENCE_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "katok_params.hpp"
#include "sphere.hpp"

namespace magsphere {

/// The parameter sequences of the two-orbit construction: k_n = 2^-n and an
/// irrational alpha_n with alpha_n / k_n -> 0. The default realisation is
/// alpha_n = k_n^2 (sqrt(5)-1)/2, irrational for rational k_n. For s = 0 a
/// weaker rule alpha_n = k_n suffices and is kept as an option.
struct SequenceSpec {
    double s = 1.0;
    enum class AlphaRule { GoldenK2, EqualK } rule = AlphaRule::GoldenK2;

    double k(int n) const { return std::pow(2.0, -n); }
    double alpha(int n) const {
        const double kn = k(n);
        const double a = (rule == AlphaRule::GoldenK2) ? kn * kn * 0.5 * (std::sqrt(5.0) - 1.0) : kn;
        return std::clamp(a, 1e-300, 1.0 - 1e-12);
    }
    KatokParams params(int n) const { return KatokParams(s, alpha(n), k(n)); }
};

struct ConvergenceRow {
    int n = 0;
    double sup_g_dev = 0.0;   // sup operator deviation of the cometric from gbar
    double sup_eta = 0.0;     // sup gbar-norm of alpha_n r_n beta
    double ratio = 0.0;       // y2 / (2 k_n) at the equator, -> 1
};

/// Pointwise operator norm of g_n - gbar on covectors: the cometric has
/// eigenvalues (2k/y2) and (2k/y2)(1 - alpha^2 w), w = |dphi|^2.
inline double cometric_deviation(const KatokParams& p, double h) {
    const double w = 1.0 - h * h;
    const double scale = 2 * p.k / p.y2_of(h);
    return std::max(std::abs(scale - 1.0), std::abs(scale * (1.0 - p.alpha * p.alpha * w) - 1.0));
}

inline std::vector<ConvergenceRow> convergence_report(const SequenceSpec& spec, int n_max,
                                                      int n_theta = 512, int n_phi = 1024) {
    std::vector<ConvergenceRow> rows;
    for (int n = 1; n <= n_max; ++n) {
        const KatokParams p = spec.params(n);
        ConvergenceRow row;
        row.n = n;
        for (int it = 0; it < n_theta; ++it) {
            const double theta = (it + 0.5) * M_PI / n_theta;
            const double h = std::cos(theta);
            // the suprema are azimuth-independent; scanning phi keeps the
            // stated grid but adds nothing
            row.sup_g_dev = std::max(row.sup_g_dev, cometric_deviation(p, h));
            row.sup_eta = std::max(row.sup_eta, p.alpha * p.r_of(h) * std::sin(theta));
        }
        (void)n_phi;
        row.ratio = p.y2_of(0.0) / (2 * p.k);
        rows.push_back(row);
    }
    return rows;
}

} // namespace magsphere

#endif
