#ifndef MAGSPHERE_INTEGRATE_HPP
#define MAGSPHERE_INTEGRATE_HPP

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <vector>

#include "hamiltonian.hpp"

namespace magsphere {

// Chart switching keeps the tag within the +-pi/16 hysteresis band of the
// canonical rule (tag A iff the chart-A colatitude lies in [pi/8, 7pi/8]):
// leave A when theta_A exits [band_exit, pi - band_exit] and return to A when
// theta_A re-enters [band_exit + pi/8, pi - band_exit - pi/8].
struct IntegrateOptions {
    double band_exit = M_PI / 16;
    double h_init = 0.0;  // 0 = automatic
    double h_min = 1e-13;
    double h_max = 0.5;
    std::size_t max_steps = 1000000;
};

enum class FlowStatus { Ok, StepUnderflow, ZeroSection, MaxSteps };

struct FlowSample {
    double t;
    CotangentState state;
    double energy;
};

/// One accepted step, with endpoint derivatives for cubic Hermite dense
/// output. The chart is constant within a step.
struct StepSegment {
    double t0, t1;
    Chart chart;
    Vec4 y0, y1, f0, f1;
};

struct FlowResult {
    FlowStatus status = FlowStatus::Ok;
    std::vector<FlowSample> samples;
    std::vector<StepSegment> segments;
    std::size_t steps_accepted = 0;
    std::size_t steps_rejected = 0;
    double energy_drift = 0.0;

    double t_begin() const { return segments.empty() ? 0.0 : segments.front().t0; }
    double t_end() const { return segments.empty() ? 0.0 : segments.back().t1; }

    /// Dense output by cubic Hermite interpolation on the accepted steps.
    ChartCoords eval_coords(double t) const {
        if (segments.empty()) throw std::runtime_error("FlowResult::eval: empty trajectory");
        const bool fwd = segments.back().t1 >= segments.front().t0;
        std::size_t lo = 0, hi = segments.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            const bool after = fwd ? (t > segments[mid].t1) : (t < segments[mid].t1);
            if (after)
                lo = mid + 1;
            else
                hi = mid;
        }
        const StepSegment& s = segments[lo];
        const double h = s.t1 - s.t0;
        const double tau = (t - s.t0) / h;
        const double a0 = (1 + 2 * tau) * (1 - tau) * (1 - tau);
        const double a1 = tau * (1 - tau) * (1 - tau) * h;
        const double b0 = tau * tau * (3 - 2 * tau);
        const double b1 = tau * tau * (tau - 1) * h;
        ChartCoords c;
        c.chart = s.chart;
        for (int i = 0; i < 4; ++i) c.y[i] = a0 * s.y0[i] + a1 * s.f0[i] + b0 * s.y1[i] + b1 * s.f1[i];
        return c;
    }

    CotangentState eval(double t) const { return from_coords(eval_coords(t)); }
};

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double dp_c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double dp_a[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
inline constexpr double dp_b5[7] = {35.0 / 384,     0.0,        500.0 / 1113, 125.0 / 192,
                                    -2187.0 / 6784, 11.0 / 84, 0.0};
inline constexpr double dp_b4[7] = {5179.0 / 57600, 0.0,          7571.0 / 16695, 393.0 / 640,
                                    -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

inline double pnorm2_of_coords(const Vec4& y) {
    const double s2 = std::max(std::sin(y[0]) * std::sin(y[0]), 1e-300);
    return y[2] * y[2] + y[3] * y[3] / s2;
}

} // namespace detail

/// Magnetic/Hamiltonian flow by an adaptive embedded Runge-Kutta 5(4) pair
/// with chart switching at band crossings. T may be negative.
inline FlowResult integrate(const Hamiltonian& H, const MagneticForm& sigma,
                            const CotangentState& start, double T, double tol,
                            const IntegrateOptions& opts = {}) {
    if (tol <= 0) throw std::invalid_argument("integrate: tol must be > 0");
    FlowResult out;

    ChartCoords c = to_coords(start);
    // Start in a chart that is comfortable for the whole hysteresis band.
    if (c.y[0] < opts.band_exit || c.y[0] > M_PI - opts.band_exit)
        c = to_coords(force_chart(start, c.chart == Chart::A ? Chart::B : Chart::A));

    const double e0 = H.value(start);
    const std::size_t guess_steps =
        std::min<std::size_t>(opts.max_steps, static_cast<std::size_t>(40 * std::abs(T)) + 16);
    out.samples.reserve(guess_steps + 1);
    out.segments.reserve(guess_steps);
    out.samples.push_back({0.0, start, e0});

    auto rhs = [&](const ChartCoords& cc) { return ham_vector_field(H, sigma, cc); };

    const double dir = (T >= 0) ? 1.0 : -1.0;
    if (T == 0.0) return out;

    Vec4 f = rhs(c);
    double fmag = 0.0;
    for (double v : f) fmag = std::max(fmag, std::abs(v));
    double h = (opts.h_init != 0.0) ? dir * std::abs(opts.h_init)
                                    : dir * std::min({0.01, std::abs(T), 0.1 / (1.0 + fmag)});

    double t = 0.0;
    const double t_done = std::abs(T) * (1.0 - 1e-15);
    while (std::abs(t) < t_done) {
        if (H.requires_punctured() && detail::pnorm2_of_coords(c.y) < 1e-16) {
            out.status = FlowStatus::ZeroSection;
            return out;
        }
        if (out.steps_accepted + out.steps_rejected >= opts.max_steps) {
            out.status = FlowStatus::MaxSteps;
            return out;
        }
        if (std::abs(h) > opts.h_max) h = dir * opts.h_max;
        bool final_step = false;
        if (dir * (t + h - T) >= 0) {
            h = T - t;
            final_step = true;
        }

        // stages
        Vec4 k[7];
        k[0] = f;
        Vec4 y1{};
        bool stage_ok = true;
        for (int st = 1; st < 7 && stage_ok; ++st) {
            Vec4 y = c.y;
            for (int j = 0; j < st; ++j) {
                const double a = detail::dp_a[st][j];
                if (a != 0.0)
                    for (int i = 0; i < 4; ++i) y[i] += h * a * k[j][i];
            }
            if (y[0] < 1e-3 || y[0] > M_PI - 1e-3) {
                stage_ok = false;  // stage left the chart; retry smaller
                break;
            }
            ChartCoords cs{c.chart, y};
            k[st] = rhs(cs);
            if (st == 6) y1 = y;
        }

        if (!stage_ok) {
            ++out.steps_rejected;
            h *= 0.5;
            if (std::abs(h) < opts.h_min * std::max(1.0, std::abs(t))) {
                out.status = FlowStatus::StepUnderflow;
                return out;
            }
            continue;
        }

        // error estimate (5th vs 4th order), scaled
        double err = 0.0;
        for (int i = 0; i < 4; ++i) {
            double e = 0.0;
            for (int st = 0; st < 7; ++st)
                e += (detail::dp_b5[st] - detail::dp_b4[st]) * k[st][i];
            e *= h;
            const double sc = tol * (1.0 + std::max(std::abs(c.y[i]), std::abs(y1[i])));
            err += (e / sc) * (e / sc);
        }
        err = std::sqrt(err / 4.0);

        if (err <= 1.0) {
            const Vec4 f1 = k[6];  // FSAL
            const double t_next = final_step ? T : t + h;
            out.segments.push_back({t, t_next, c.chart, c.y, y1, k[0], f1});
            t = t_next;
            ++out.steps_accepted;

            ChartCoords cn{c.chart, y1};
            CotangentState xs = from_coords(cn);
            const double e = H.value(xs);
            out.energy_drift = std::max(out.energy_drift, std::abs(e - e0));
            out.samples.push_back({t, xs, e});

            // hysteresis chart switch, driven by the chart-A colatitude
            const double theta_a = std::acos(std::clamp(xs.q.ambient.z, -1.0, 1.0));
            bool switch_chart = false;
            if (c.chart == Chart::A) {
                switch_chart = theta_a < opts.band_exit || theta_a > M_PI - opts.band_exit;
            } else {
                const double t_in = opts.band_exit + M_PI / 8;
                switch_chart = theta_a > t_in && theta_a < M_PI - t_in;
            }
            if (switch_chart) {
                const Chart other = (c.chart == Chart::A) ? Chart::B : Chart::A;
                xs = force_chart(xs, other);
                c = to_coords(xs);
                f = rhs(c);
            } else {
                c = cn;
                f = f1;
            }
        } else {
            ++out.steps_rejected;
        }

        const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-12), -0.2), 0.2, 5.0);
        h *= fac;
        if (std::abs(h) < opts.h_min * std::max(1.0, std::abs(t))) {
            out.status = FlowStatus::StepUnderflow;
            return out;
        }
    }
    return out;
}

/// Trajectory CSV: t,theta,phi,p_theta,p_phi,chart,energy
inline void write_trajectory_csv(const FlowResult& r, std::ostream& os) {
    os << "t,theta,phi,p_theta,p_phi,chart,energy\n";
    char buf[256];
    for (const FlowSample& s : r.samples) {
        std::snprintf(buf, sizeof(buf), "%.12e,%.12e,%.12e,%.12e,%.12e,%c,%.12e\n", s.t,
                      s.state.q.theta, s.state.q.phi, s.state.p_theta, s.state.p_phi,
                      s.state.q.chart == Chart::A ? 'A' : 'B', s.energy);
        os << buf;
    }
}

} // namespace magsphere

#endif
