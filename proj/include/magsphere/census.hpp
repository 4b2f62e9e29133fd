#ifndef MAGSPHERE_CENSUS_HPP
#define MAGSPHERE_CENSUS_HPP

#include <algorithm>
#include <atomic>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "integrate.hpp"
#include "katok.hpp"
#include "rng.hpp"

namespace magsphere {

// ---------------------------------------------------------------------------
// Poincare sections.

/// A fixed energy level of a magnetic Hamiltonian system together with a
/// section functional restricted to it. The default functional is p_theta
/// about the frame axis (smooth ambient form -p.axis); the meridian
/// functional q.b covers the orbits on which p_theta vanishes identically.
struct SectionSpec {
    Hamiltonian H;
    MagneticForm sigma;
    double energy = 0.0;
    enum class Functional { PTheta, MeridianY } primary = Functional::PTheta;
    Vec3 axis{0, 0, 1};

    Vec3 meridian_normal() const {
        const Vec3 a = normalized(axis);
        Vec3 b = cross(a, Vec3{1, 0, 0});
        if (norm(b) < 1e-6) b = cross(a, Vec3{0, 1, 0});
        return normalized(b);
    }
};

inline double section_value(const SectionSpec& spec, SectionSpec::Functional f,
                            const CotangentState& x) {
    if (f == SectionSpec::Functional::PTheta) return -dot(x.p_dual, normalized(spec.axis));
    return dot(x.q.ambient, spec.meridian_normal());
}

inline Jet section_jet(const SectionSpec& spec, SectionSpec::Functional f, const ChartCoords& c) {
    const AmbientJets aj = ambient_jets(c);
    if (f == SectionSpec::Functional::PTheta) {
        const Vec3 a = normalized(spec.axis);
        return -(Jet(a.x) * aj.p.x + Jet(a.y) * aj.p.y + Jet(a.z) * aj.p.z);
    }
    const Vec3 b = spec.meridian_normal();
    return Jet(b.x) * aj.q.x + Jet(b.y) * aj.q.y + Jet(b.z) * aj.q.z;
}

/// d/dt of the section functional along the flow.
inline double section_rate(const SectionSpec& spec, SectionSpec::Functional f,
                           const CotangentState& x) {
    const ChartCoords c = to_coords(x);
    const Vec4 X = ham_vector_field(spec.H, spec.sigma, c);
    const Jet sj = section_jet(spec, f, c);
    return sj.d[0] * X[0] + sj.d[1] * X[1] + sj.d[2] * X[2] + sj.d[3] * X[3];
}

struct Crossing {
    double t = 0.0;
    CotangentState state;
};

struct CrossingScan {
    std::vector<Crossing> crossings;
    int n_tangential_skipped = 0;
    FlowStatus flow_status = FlowStatus::Ok;
};

namespace detail {

// Which located crossings get the exact-state polish. The Hermite
// interpolant carries an O(h^4) error (1e-8 scale), too coarse for Newton
// displacements and closure gates but plenty for near-return distances at
// the 0.05 scale, so the polish is applied selectively.
struct PolishRule {
    std::size_t first_n = 0;                    // polish crossings with index < first_n
    std::size_t exact = static_cast<std::size_t>(-1);  // and this index

    static PolishRule all() { return {static_cast<std::size_t>(-1), static_cast<std::size_t>(-1)}; }
    static PolishRule none() { return {0, static_cast<std::size_t>(-1)}; }
    static PolishRule first(std::size_t n) { return {n, static_cast<std::size_t>(-1)}; }
    static PolishRule only(std::size_t i) { return {0, i}; }
    bool wants(std::size_t i) const { return i < first_n || i == exact; }
};

/// Locate positive-direction transverse crossings of the section functional
/// on the dense output: sub-sample each accepted step, bisect the sign
/// changes on the Hermite interpolant to time tolerance 1e-10, then polish
/// selected crossing states by a short exact integration from the step start.
inline void scan_segments(const SectionSpec& spec, SectionSpec::Functional f, const FlowResult& fl,
                          double t_offset, double t_skip, double t_cap,
                          std::vector<Crossing>& out, int& tangential, std::size_t max_crossings,
                          const PolishRule& polish = PolishRule::all()) {
    constexpr int kSub = 8;
    auto sval = [&](double t) { return section_value(spec, f, fl.eval(t)); };
    for (const StepSegment& seg : fl.segments) {
        if (out.size() >= max_crossings) return;
        const double dt = (seg.t1 - seg.t0) / kSub;
        double ta = seg.t0, va = sval(ta);
        for (int i = 1; i <= kSub; ++i) {
            const double tb = (i == kSub) ? seg.t1 : seg.t0 + i * dt;
            const double vb = sval(tb);
            if ((va < 0) != (vb < 0)) {
                double lo = ta, hi = tb, vlo = va;
                for (int it = 0; it < 60 && hi - lo > 1e-10 * std::max(1.0, std::abs(hi)); ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double vm = sval(mid);
                    if ((vlo < 0) != (vm < 0))
                        hi = mid;
                    else {
                        lo = mid;
                        vlo = vm;
                    }
                }
                double tc = 0.5 * (lo + hi);
                const double tg0 = t_offset + tc;
                const bool fresh = out.empty() || tg0 - out.back().t > 1e-9;
                if (tg0 > t_skip && tg0 <= t_cap && fresh) {
                    CotangentState xc = fl.eval(tc);
                    double rate = section_rate(spec, f, xc);
                    if (std::abs(rate) > 1e-6 && polish.wants(out.size())) {
                        const CotangentState seg_start = from_coords({seg.chart, seg.y0});
                        for (int it = 0; it < 3; ++it) {
                            const FlowResult hop =
                                integrate(spec.H, spec.sigma, seg_start, tc - seg.t0, 1e-12);
                            xc = hop.samples.back().state;
                            const double sv = section_value(spec, f, xc);
                            rate = section_rate(spec, f, xc);
                            if (std::abs(sv) < 1e-13 || rate == 0.0) break;
                            tc -= sv / rate;
                        }
                    }
                    if (std::abs(rate) <= 1e-6)
                        ++tangential;  // tangential crossing: skipped
                    else if (rate > 0)
                        out.push_back({t_offset + tc, xc});
                    if (out.size() >= max_crossings) return;
                }
            }
            ta = tb;
            va = vb;
        }
    }
}

} // namespace detail

/// Successive transverse positive-direction crossings of the section through
/// x within the time budget. Throws if no crossing is found at all.
inline CrossingScan poincare_return(const SectionSpec& spec, const CotangentState& x,
                                    std::size_t n_returns, double time_budget = 1e3,
                                    double tol = 1e-10,
                                    SectionSpec::Functional functional = SectionSpec::Functional::PTheta,
                                    const detail::PolishRule& polish = detail::PolishRule::all()) {
    CrossingScan scan;
    CotangentState cur = x;
    double t_offset = 0.0;
    const double chunk = std::min(time_budget, 10.0);
    while (scan.crossings.size() < n_returns && t_offset < time_budget - 1e-12) {
        const double T = std::min(chunk, time_budget - t_offset);
        FlowResult fl = integrate(spec.H, spec.sigma, cur, T, tol);
        scan.flow_status = fl.status;
        detail::scan_segments(spec, functional, fl, t_offset, 1e-3, time_budget, scan.crossings,
                              scan.n_tangential_skipped, n_returns, polish);
        if (fl.status != FlowStatus::Ok) break;
        cur = fl.samples.back().state;
        t_offset += T;
    }
    if (scan.crossings.empty())
        throw std::runtime_error("poincare_return: no transverse crossing within the time budget");
    return scan;
}

// ---------------------------------------------------------------------------
// Newton shooting on the return map.

struct OrbitRecord {
    CotangentState representative;
    double period = 0.0;
    double energy = 0.0;
    double closure_defect = 0.0;
    double period_cap_checked = 0.0;
};

struct ShootResult {
    bool converged = false;
    OrbitRecord record;
    int iterations = 0;
    std::string reason;
};

namespace detail {

struct SectionChart {
    ChartCoords base;
    std::array<Vec4, 2> tangent;  // orthonormal basis of ker dH ^ ker dS
};

inline ChartCoords project_to_section(const SectionSpec& spec, SectionSpec::Functional f,
                                      ChartCoords c) {
    for (int it = 0; it < 40; ++it) {
        const Jet hj = spec.H.jet(c);
        const Jet sj = section_jet(spec, f, c);
        const double r1 = hj.v - spec.energy;
        const double r2 = sj.v;
        if (std::abs(r1) + std::abs(r2) < 1e-14 * (1.0 + std::abs(spec.energy))) break;
        // least-norm Newton update: delta = -J^T (J J^T)^{-1} r
        const double a11 = dot4(hj.d, hj.d), a12 = dot4(hj.d, sj.d), a22 = dot4(sj.d, sj.d);
        const auto mu = solve2(a11, a12, a12, a22, -r1, -r2);
        for (int i = 0; i < 4; ++i) c.y[i] += mu[0] * hj.d[i] + mu[1] * sj.d[i];
    }
    return c;
}

inline SectionChart section_chart(const SectionSpec& spec, SectionSpec::Functional f,
                                  const ChartCoords& c) {
    const Jet hj = spec.H.jet(c);
    const Jet sj = section_jet(spec, f, c);
    return {c, nullspace2(hj.d, sj.d)};
}

inline Vec4 wrap_diff(Vec4 d) {
    while (d[1] > M_PI) d[1] -= 2 * M_PI;
    while (d[1] < -M_PI) d[1] += 2 * M_PI;
    return d;
}

} // namespace detail

/// Newton iteration on the displacement of the return nearest the period
/// guess. The Jacobian is 2x2 in section coordinates, by finite differences
/// of the return map. Divergence after the iteration cap is a result, not
/// an error.
inline ShootResult shoot(const SectionSpec& spec, const CotangentState& x0, double period_guess,
                         double period_cap = 100.0, double tol = 1e-12,
                         SectionSpec::Functional functional = SectionSpec::Functional::PTheta) {
    using detail::project_to_section;
    using detail::wrap_diff;
    ShootResult res;
    if (period_guess <= 0) {
        res.reason = "period guess must be positive";
        return res;
    }

    ChartCoords base = project_to_section(spec, functional, to_coords(x0));
    const detail::SectionChart sc = detail::section_chart(spec, functional, base);

    // Newton runs at a slightly relaxed tolerance; the final record is
    // polished at the requested one
    const double tol_newton = std::max(tol, 1e-11);

    // fix the crossing index nearest the guess once, from the seed's own scan
    std::size_t j_return = 0;
    {
        CrossingScan scan;
        try {
            scan = poincare_return(spec, from_coords(base), 4096,
                                   std::min(1.3 * period_guess + 5.0, 1.5 * period_cap),
                                   tol_newton, functional, detail::PolishRule::none());
        } catch (const std::runtime_error&) {
            res.reason = "no return from seed";
            return res;
        }
        double best = 1e300;
        for (std::size_t i = 0; i < scan.crossings.size(); ++i) {
            const double miss = std::abs(scan.crossings[i].t - period_guess);
            if (miss < best) {
                best = miss;
                j_return = i + 1;
            }
        }
        if (j_return == 0 || best > 0.3 * period_guess + 1.0) {
            res.reason = "no crossing near the period guess";
            return res;
        }
    }

    auto state_at = [&](const std::array<double, 2>& delta) {
        ChartCoords c = base;
        for (int i = 0; i < 4; ++i) c.y[i] += delta[0] * sc.tangent[0][i] + delta[1] * sc.tangent[1][i];
        return from_coords(project_to_section(spec, functional, c));
    };

    // displacement of the j-th return, in section coordinates; evaluations
    // are budgeted so a divergent far-period candidate cannot burn the run
    int evals_left = 30;
    auto displacement = [&](const std::array<double, 2>& delta,
                            double* period_out) -> std::optional<std::array<double, 2>> {
        if (--evals_left < 0) return std::nullopt;
        const CotangentState xs = state_at(delta);
        CrossingScan scan;
        try {
            scan = poincare_return(spec, xs, j_return,
                                   std::min(1.15 * period_guess + 2.0, 1.5 * period_cap),
                                   tol_newton, functional, detail::PolishRule::only(j_return - 1));
        } catch (const std::runtime_error&) {
            return std::nullopt;
        }
        if (scan.crossings.size() < j_return) return std::nullopt;
        const Crossing& cr = scan.crossings[j_return - 1];
        const ChartCoords cj = to_coords(force_chart(cr.state, base.chart));
        const ChartCoords c0 = to_coords(xs);
        const Vec4 diff = wrap_diff(cj.y - c0.y);
        if (period_out) *period_out = cr.t;
        return std::array<double, 2>{dot4(diff, sc.tangent[0]), dot4(diff, sc.tangent[1])};
    };

    std::array<double, 2> delta{0, 0};
    double period = 0.0;
    auto d0 = displacement(delta, &period);
    if (!d0) {
        res.reason = "no return from seed";
        return res;
    }
    double dn = std::hypot((*d0)[0], (*d0)[1]);
    const double dn_start = dn;

    const double fd = 1e-6;
    for (int it = 0; it < 16 && dn >= 1e-10; ++it) {
        res.iterations = it + 1;
        if ((it == 3 && dn > 0.7 * dn_start) || (it == 6 && dn > 0.1 * dn_start)) {
            res.reason = "stalled";
            return res;
        }
        // forward-difference Jacobian
        double J[2][2];
        bool ok = true;
        for (int cidx = 0; cidx < 2 && ok; ++cidx) {
            std::array<double, 2> dp = delta;
            dp[cidx] += fd;
            const auto rp = displacement(dp, nullptr);
            if (!rp) {
                ok = false;
                break;
            }
            J[0][cidx] = ((*rp)[0] - (*d0)[0]) / fd;
            J[1][cidx] = ((*rp)[1] - (*d0)[1]) / fd;
        }
        if (!ok) {
            res.reason = evals_left < 0 ? "evaluation budget" : "return lost during Jacobian";
            return res;
        }
        std::array<double, 2> step{};
        try {
            step = solve2(J[0][0], J[0][1], J[1][0], J[1][1], -(*d0)[0], -(*d0)[1]);
        } catch (const std::runtime_error&) {
            // degenerate orbit: damped fallback
            step = {-0.5 * (*d0)[0], -0.5 * (*d0)[1]};
        }
        double scale = 1.0;
        bool moved = false;
        for (int half = 0; half < 3 && !moved; ++half) {
            const std::array<double, 2> trial{delta[0] + scale * step[0], delta[1] + scale * step[1]};
            const auto dt = displacement(trial, &period);
            if (dt) {
                const double dtn = std::hypot((*dt)[0], (*dt)[1]);
                if (dtn < dn) {
                    delta = trial;
                    d0 = dt;
                    dn = dtn;
                    moved = true;
                }
            }
            scale *= 0.5;
        }
        if (!moved) {
            res.reason = evals_left < 0 ? "evaluation budget" : "no decrease";
            return res;
        }
    }
    if (dn >= 1e-10) {
        res.reason = "iteration cap";
        return res;
    }

    // polished orbit: reduce to the primitive period (verifying candidate
    // sub-periods by re-integration) and re-check closure
    const CotangentState rep = state_at(delta);
    double prim = period;
    {
        CrossingScan scan =
            poincare_return(spec, rep, j_return, 1.02 * period + 0.1, tol_newton, functional);
        for (const Crossing& cr : scan.crossings) {
            if (cr.t > 1e-3 && cr.t < period - 1e-3 && phase_distance(cr.state, rep) < 1e-6) {
                const FlowResult probe = integrate(spec.H, spec.sigma, rep, cr.t, tol);
                if (phase_distance(probe.samples.back().state, rep) < 1e-7) {
                    prim = cr.t;
                    break;
                }
            }
        }
    }
    FlowResult closing = integrate(spec.H, spec.sigma, rep, prim, tol);
    res.converged = true;
    res.record.representative = rep;
    res.record.period = prim;
    res.record.energy = spec.H.value(rep);
    res.record.closure_defect = phase_distance(closing.samples.back().state, rep);
    res.record.period_cap_checked = period_cap;
    return res;
}

/// Flow x to its first positive crossing of the given section functional.
inline CotangentState reseed_on_section(const SectionSpec& spec, const CotangentState& x,
                                        SectionSpec::Functional functional, double budget = 50.0,
                                        double tol = 1e-10) {
    const CrossingScan scan = poincare_return(spec, x, 1, budget, tol, functional);
    return scan.crossings.front().state;
}

// ---------------------------------------------------------------------------
// Census.

struct CensusOptions {
    int seeds = 256;
    double period_cap = 100.0;
    double near_return_dist = 0.05;
    double dedup_dist = 1e-4;
    double scan_tol = 1e-10;
    double shoot_tol = 1e-12;
    std::uint64_t rng_seed = 0;
};

struct CensusResult {
    std::vector<OrbitRecord> orbits;
    bool totally_periodic = false;
    double common_period = 0.0;
    int seeds_used = 0;
    double period_cap = 0.0;
    int n_closed_first_return = 0;
    int n_shoot_converged = 0;
    int n_shoot_diverged = 0;
    int n_no_return = 0;
};

namespace detail {

inline std::vector<CotangentState> orbit_samples(const SectionSpec& spec, const OrbitRecord& rec,
                                                 int n, double tol) {
    FlowResult fl = integrate(spec.H, spec.sigma, rec.representative, rec.period, tol);
    std::vector<CotangentState> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.push_back(fl.eval(rec.period * i / n));
    return out;
}

inline double orbit_distance(const std::vector<CotangentState>& samples, const CotangentState& x) {
    double best = 1e300;
    for (const CotangentState& s : samples) best = std::min(best, phase_distance(s, x));
    return best;
}

struct SeedScan {
    std::vector<Crossing> primary;   // crossings of the primary functional
    std::vector<Crossing> meridian;  // crossings of the meridian functional
    int n_tangential = 0;
};

// One trajectory integration per seed, scanned against both section
// functionals. The axial-momentum section sees the whole-section drift of
// an axisymmetric flow and so never produces near-returns along the
// precessing tori; the meridian section sees the local twist around the
// periodic orbits. Candidates are taken from both.
inline SeedScan scan_seed(const SectionSpec& spec, const CotangentState& seed, double cap,
                          double tol) {
    SeedScan out;
    CotangentState cur = seed;
    double t_offset = 0.0;
    // only the leading crossings feed the 1e-6 closure gate; the rest serve
    // near-return distances at the 0.05 scale and keep the Hermite states
    const PolishRule polish = PolishRule::first(4);
    while (t_offset < cap - 1e-12) {
        const double T = std::min(50.0, cap - t_offset);
        const FlowResult fl = integrate(spec.H, spec.sigma, cur, T, tol);
        scan_segments(spec, SectionSpec::Functional::PTheta, fl, t_offset, 1e-3, cap, out.primary,
                      out.n_tangential, 4096, polish);
        scan_segments(spec, SectionSpec::Functional::MeridianY, fl, t_offset, 1e-3, cap,
                      out.meridian, out.n_tangential, 4096, polish);
        if (fl.status != FlowStatus::Ok) break;
        cur = fl.samples.back().state;
        t_offset += T;
    }
    std::sort(out.primary.begin(), out.primary.end(),
              [](const Crossing& a, const Crossing& b) { return a.t < b.t; });
    std::sort(out.meridian.begin(), out.meridian.end(),
              [](const Crossing& a, const Crossing& b) { return a.t < b.t; });
    return out;
}

struct SeedOutcome {
    bool no_return = false;
    double closed_at = 0.0;
    std::optional<OrbitRecord> record;  // closed-seed record or first converged shoot
    int shoot_converged = 0;
    int shoot_diverged = 0;
};

inline SeedOutcome process_seed(const SectionSpec& spec, const CotangentState& seed,
                                const CensusOptions& opts) {
    SeedOutcome out;
    const SeedScan scan = scan_seed(spec, seed, opts.period_cap, opts.scan_tol);
    if (scan.primary.empty() && scan.meridian.empty()) {
        out.no_return = true;
        return out;
    }

    // a reference state on each section: the seed itself lies on the primary
    // section by construction; the first meridian crossing anchors the
    // meridian return map
    const CotangentState* mref = scan.meridian.empty() ? nullptr : &scan.meridian.front().state;
    const double mref_t = scan.meridian.empty() ? 0.0 : scan.meridian.front().t;

    // a seed that closes within its first few returns is already on a
    // periodic orbit; Newton has nothing to do
    CotangentState closed_rep = seed;
    for (std::size_t i = 0; i < std::min<std::size_t>(scan.primary.size(), 3); ++i) {
        if (phase_distance(scan.primary[i].state, seed) < 1e-6) {
            out.closed_at = scan.primary[i].t;
            break;
        }
    }
    if (out.closed_at == 0.0 && mref) {
        for (std::size_t i = 1; i < std::min<std::size_t>(scan.meridian.size(), 4); ++i) {
            if (phase_distance(scan.meridian[i].state, *mref) < 1e-6) {
                out.closed_at = scan.meridian[i].t - mref_t;
                closed_rep = *mref;
                break;
            }
        }
    }
    if (out.closed_at > 0.0) {
        OrbitRecord rec;
        rec.representative = closed_rep;
        rec.period = out.closed_at;
        rec.energy = spec.H.value(closed_rep);
        rec.period_cap_checked = opts.period_cap;
        FlowResult closing = integrate(spec.H, spec.sigma, closed_rep, rec.period, opts.shoot_tol);
        rec.closure_defect = phase_distance(closing.samples.back().state, closed_rep);
        out.record = rec;
        return out;
    }

    // near-returns on either section
    struct Candidate {
        double dist;
        double guess;
        SectionSpec::Functional fn;
    };
    std::vector<Candidate> near;
    for (const Crossing& cr : scan.primary) {
        const double d = phase_distance(cr.state, seed);
        if (d < opts.near_return_dist) near.push_back({d, cr.t, SectionSpec::Functional::PTheta});
    }
    if (mref) {
        for (std::size_t i = 1; i < scan.meridian.size(); ++i) {
            const double d = phase_distance(scan.meridian[i].state, *mref);
            if (d < opts.near_return_dist)
                near.push_back({d, scan.meridian[i].t - mref_t, SectionSpec::Functional::MeridianY});
        }
    }
    // earliest candidates first: Newton converges from any near-return, and
    // short return times are much cheaper to iterate on; far-period
    // candidates are dropped when a short one exists
    std::sort(near.begin(), near.end(), [](const Candidate& a, const Candidate& b) {
        return (a.guess != b.guess) ? a.guess < b.guess : a.dist < b.dist;
    });
    if (!near.empty()) {
        const double cutoff = 2.5 * near.front().guess + 1.0;
        while (near.size() > 1 && near.back().guess > cutoff) near.pop_back();
    }
    if (near.size() > 2) near.resize(2);

    for (const Candidate& cand : near) {
        const CotangentState& x0 = (cand.fn == SectionSpec::Functional::PTheta) ? seed : *mref;
        ShootResult sr = shoot(spec, x0, cand.guess, opts.period_cap, opts.shoot_tol, cand.fn);
        if (!sr.converged) {
            ++out.shoot_diverged;
            continue;
        }
        ++out.shoot_converged;
        out.record = sr.record;
        break;
    }
    return out;
}

} // namespace detail

/// Periodic-orbit census on the energy level: quasi-uniform seeds on the
/// section, near-returns polished by Newton shooting, deduplication by
/// phase-space orbit distance. Seeds are processed independently (in
/// parallel) and reduced in seed order, so the result is deterministic for
/// a given seed count and rng seed. "Exactly two" statements are certified
/// only relative to (seed count, period cap).
inline CensusResult census(const SectionSpec& spec, const CensusOptions& opts = {}) {
    CensusResult result;
    result.seeds_used = opts.seeds;
    result.period_cap = opts.period_cap;

    const Vec3 axis = normalized(spec.axis);
    Sobol sobol(2);

    const double bracket_hint = 1.0 + std::sqrt(2 * std::abs(spec.energy));

    // deterministic seed construction
    std::vector<CotangentState> seeds;
    int attempts = 0;
    while (static_cast<int>(seeds.size()) < opts.seeds && attempts < 4 * opts.seeds) {
        ++attempts;
        const auto u = sobol.next();
        const double ct = 1.0 - 2.0 * u[0];
        const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        const double ph = 2 * M_PI * u[1];
        // seed base point in the frame adapted to the axis
        Vec3 ex = cross(axis, Vec3{1, 0, 0});
        if (norm(ex) < 1e-6) ex = cross(axis, Vec3{0, 1, 0});
        ex = normalized(ex);
        const Vec3 ey = cross(axis, ex);
        const Vec3 q = st * std::cos(ph) * ex + st * std::sin(ph) * ey + ct * axis;
        const Vec3 tangent = cross(q, axis);
        if (norm(tangent) < 0.05) continue;  // too close to the frame poles
        const Vec3 dir = ((seeds.size() % 2) ? -1.0 : 1.0) * normalized(tangent);
        double radius;
        try {
            radius = ray_level_radius(
                [&](double m) { return spec.H.value(cot_from_ambient(q, m * dir)); }, spec.energy,
                bracket_hint);
        } catch (const std::exception&) {
            continue;
        }
        seeds.push_back(cot_from_ambient(q, radius * dir));
    }

    // independent per-seed work, parallel over hardware threads
    std::vector<detail::SeedOutcome> outcomes(seeds.size());
    {
        const unsigned n_threads =
            std::max(1u, std::min(std::thread::hardware_concurrency(), 4u));
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= seeds.size()) return;
                outcomes[i] = detail::process_seed(spec, seeds[i], opts);
            }
        };
        std::vector<std::thread> pool;
        for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
        worker();
        for (std::thread& th : pool) th.join();
    }

    // sequential reduction over immutable records, in seed order
    std::vector<std::vector<CotangentState>> orbit_samples;
    std::vector<double> first_return_times;
    auto try_insert = [&](const OrbitRecord& rec) {
        if (rec.closure_defect > 1e-7 || std::abs(rec.energy - spec.energy) > 1e-9) return;
        for (std::size_t oi = 0; oi < result.orbits.size(); ++oi)
            if (detail::orbit_distance(orbit_samples[oi], rec.representative) < opts.dedup_dist)
                return;
        result.orbits.push_back(rec);
        orbit_samples.push_back(detail::orbit_samples(spec, rec, 256, opts.scan_tol));
    };
    for (const detail::SeedOutcome& out : outcomes) {
        if (out.no_return) ++result.n_no_return;
        if (out.closed_at > 0.0) {
            ++result.n_closed_first_return;
            first_return_times.push_back(out.closed_at);
        }
        result.n_shoot_converged += out.shoot_converged;
        result.n_shoot_diverged += out.shoot_diverged;
        if (out.record) try_insert(*out.record);
    }
    const int made = static_cast<int>(seeds.size());

    // totally periodic detection: nearly all seeds close at the first return
    // with a common period
    if (made > 0 && result.n_closed_first_return >= (9 * made) / 10 && !first_return_times.empty()) {
        double tmin = first_return_times.front(), tmax = tmin;
        for (double t : first_return_times) {
            tmin = std::min(tmin, t);
            tmax = std::max(tmax, t);
        }
        if (tmax - tmin < 1e-6 * (1.0 + tmax)) {
            result.totally_periodic = true;
            result.common_period = 0.5 * (tmin + tmax);
        }
    }

    std::sort(result.orbits.begin(), result.orbits.end(),
              [](const OrbitRecord& a, const OrbitRecord& b) { return a.period < b.period; });
    return result;
}

} // namespace magsphere

#endif
