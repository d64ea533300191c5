#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "y00lab/config.hpp"
#include "y00lab/errors.hpp"
#include "y00lab/rng.hpp"
#include "y00lab/y00core.hpp"

namespace y00lab::channel {

using core::DsrMode;
using core::Geometry;
using core::Y00Config;

// ---------------------------------------------------------------------------
// quadrature

namespace detail {

inline double simpson(const std::function<double(double)>& f, double a, double b,
                      double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson(f, a, m, fa, flm, fm);
    double right = simpson(f, m, b, fm, frm, fb);
    double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol || (b - a) < 1e-14)
        return left + right + delta / 15.0;
    if (depth <= 0)
        throw numeric_error("adaptive quadrature failed to converge");
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
}

} // namespace detail

/// Adaptive Simpson integration to absolute tolerance. Refuses (throws)
/// rather than returning a value it cannot trust.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double abs_tol = 1e-12, int max_depth = 48) {
    double m = 0.5 * (a + b);
    double fa = f(a), fm = f(m), fb = f(b);
    double whole = detail::simpson(f, a, b, fa, fm, fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, abs_tol, max_depth);
}

// ---------------------------------------------------------------------------
// outcome sampling

/// Eve's tapped heterodyne record: outcome(t) ~ CN(eta * alpha[m(t)], sigma^2
/// per quadrature), one counter-addressed stream per slot so results do not
/// depend on evaluation order.
inline std::vector<std::complex<double>> tap_and_measure(const core::SymbolTrace& tr,
                                                         const Y00Config& cfg,
                                                         std::uint64_t seed) {
    cfg.validate();
    const double sigma = cfg.noise.sigma();
    std::vector<std::complex<double>> out(tr.size());
    for (std::size_t t = 0; t < tr.size(); ++t) {
        RandomStream rs(seed, t);
        out[t] = rs.next_complex_gaussian(cfg.eta * tr.slots[t].amp, sigma);
    }
    return out;
}

/// Bob's receiver record; he keeps the energy Eve does not tap.
inline std::vector<std::complex<double>> bob_receive(const core::SymbolTrace& tr,
                                                     const Y00Config& cfg,
                                                     std::uint64_t seed) {
    cfg.validate();
    const double sigma = cfg.noise.sigma();
    const std::uint64_t bob_seed = mix_seed(seed, 0xB0B5C41Eull);
    std::vector<std::complex<double>> out(tr.size());
    for (std::size_t t = 0; t < tr.size(); ++t) {
        RandomStream rs(bob_seed, t);
        out[t] = rs.next_complex_gaussian(cfg.bob_scale() * tr.slots[t].amp, sigma);
    }
    return out;
}

// ---------------------------------------------------------------------------
// decision regions

/// Partition of the outcome plane into 2M cells, one per symbol index.
/// PSK: equal angular sectors of width pi/M centered on each signal phase.
/// ISK: Voronoi intervals of the tapped amplitude ladder on the real axis.
struct DecisionRegionSet {
    Geometry geometry = Geometry::PSK;
    std::uint32_t points = 0;               // 2M
    std::vector<double> isk_thresholds;     // points-1 ascending cut positions

    static DecisionRegionSet for_eve(const Y00Config& cfg) {
        DecisionRegionSet r;
        r.geometry = cfg.geometry;
        r.points = cfg.points();
        if (cfg.geometry == Geometry::ISK) {
            if (cfg.eta * cfg.alpha0 <= 0.0)
                throw config_error("regions: ISK ladder degenerates at eta*alpha0 = 0");
            for (std::uint32_t j = 0; j + 1 < r.points; ++j) {
                double a = std::real(cfg.eve_amplitude(j));
                double b = std::real(cfg.eve_amplitude(j + 1));
                r.isk_thresholds.push_back(0.5 * (a + b));
            }
        }
        return r;
    }
};

/// Cell lookup; exact boundary points resolve to the lower index.
inline std::uint32_t decide_symbol(std::complex<double> y, const DecisionRegionSet& r) {
    if (r.geometry == Geometry::PSK) {
        const double sector = 2.0 * M_PI / static_cast<double>(r.points);  // pi/M
        double u = std::atan2(y.imag(), y.real()) / sector;
        auto k = static_cast<long long>(std::ceil(u - 0.5));
        long long p = static_cast<long long>(r.points);
        return static_cast<std::uint32_t>(((k % p) + p) % p);
    }
    double v = y.real();
    std::uint32_t j = 0;
    while (j < r.isk_thresholds.size() && v > r.isk_thresholds[j]) ++j;
    return j;
}

// ---------------------------------------------------------------------------
// per-symbol error distribution

namespace detail {

/// Angle density of an isotropic Gaussian displaced to radius `a` (in sigma
/// units) from the origin, signal direction at angle zero.
inline double angle_density(double theta, double a) {
    const double inv2pi = 0.15915494309189533577;
    double c = a * std::cos(theta), s = a * std::sin(theta);
    double base = std::exp(-0.5 * a * a) * inv2pi;
    double tail = c * 0.19947114020071633897 * std::exp(-0.5 * s * s) *
                  (1.0 + std::erf(c * M_SQRT1_2));
    return base + tail;
}

inline double norm_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

} // namespace detail

/// Pr(detected = true_m + delta mod 2M | true_m), indexed by delta.
/// PSK distributions are shift invariant in delta; ISK ones depend on the
/// true index through the ladder geometry.
inline std::vector<double> symbol_error_dist(std::uint32_t true_m, const Y00Config& cfg,
                                             double abs_tol = 1e-12) {
    cfg.validate();
    const std::uint32_t n = cfg.points();
    const double sigma = cfg.noise.sigma();
    std::vector<double> p(n, 0.0);

    if (cfg.geometry == Geometry::PSK) {
        const double a = cfg.eta * cfg.alpha0 / sigma;
        const double half = M_PI / (2.0 * static_cast<double>(cfg.m_levels));
        auto f = [a](double th) { return detail::angle_density(th, a); };
        for (std::uint32_t delta = 0; delta < n; ++delta) {
            auto signed_d = static_cast<double>(delta <= n / 2 ? static_cast<long>(delta)
                                                               : static_cast<long>(delta) - n);
            double center = 2.0 * half * signed_d;
            p[delta] = integrate(f, center - half, center + half, abs_tol);
        }
    } else {
        DecisionRegionSet r = DecisionRegionSet::for_eve(cfg);
        const double mu = std::real(cfg.eve_amplitude(true_m));
        for (std::uint32_t j = 0; j < n; ++j) {
            double lo = j == 0 ? -std::numeric_limits<double>::infinity()
                               : (r.isk_thresholds[j - 1] - mu) / sigma;
            double hi = j + 1 == n ? std::numeric_limits<double>::infinity()
                                   : (r.isk_thresholds[j] - mu) / sigma;
            double prob = detail::norm_cdf(hi) - detail::norm_cdf(lo);
            p[(j - true_m + n) % n] = std::max(prob, 0.0);
        }
    }

    double s = 0.0;
    for (double v : p) s += v;
    if (std::abs(s - 1.0) > 1e-9)
        throw numeric_error("symbol_error_dist: cell masses do not sum to 1");
    for (double& v : p) v /= s;
    return p;
}

/// Detected-offset distribution for one slot relative to the keyed reference
/// index. Under true-random DSR the transmitted base is uniform over the
/// band, so the per-symbol distributions are averaged over it.
inline std::vector<double> slot_offset_dist(const Y00Config& cfg, std::uint32_t reference_m,
                                            double abs_tol = 1e-12) {
    const std::uint32_t n = cfg.points();
    if (cfg.dsr.mode != DsrMode::TrueRandom)
        return symbol_error_dist(reference_m, cfg, abs_tol);
    const std::uint32_t band = reference_m >= cfg.m_levels ? 1 : 0;
    std::vector<double> p(n, 0.0);
    for (std::uint32_t c = 0; c < cfg.m_levels; ++c) {
        std::uint32_t tau = c + cfg.m_levels * band;
        std::vector<double> g = symbol_error_dist(tau, cfg, abs_tol);
        for (std::uint32_t delta = 0; delta < n; ++delta) {
            std::uint32_t detected = (reference_m + delta) % n;
            std::uint32_t rel = (detected - tau + n) % n;
            p[delta] += g[rel] / static_cast<double>(cfg.m_levels);
        }
    }
    return p;
}

// ---------------------------------------------------------------------------
// per-period error-pattern distribution

/// Distribution over Eve's per-period error patterns. A pattern serializes
/// the per-slot offsets MSB-first, slot 0 in the top bits; the table is dense
/// for small periods and kept in per-slot product form otherwise.
struct ErrorPatternDist {
    unsigned offset_bits = 1;                       // log2(2M)
    std::uint64_t period = 1;                       // T_LCM in slots
    bool stationary = false;                        // all slots share slot_dists[0]
    std::vector<std::vector<double>> slot_dists;
    double min_prob = 0.0;
    double log2_min_prob = 0.0;

    std::uint64_t pattern_bits() const { return period * offset_bits; }

    const std::vector<double>& slot(std::uint64_t t) const {
        return stationary ? slot_dists[0] : slot_dists.at(t);
    }

    double pattern_prob(std::uint64_t pattern) const {
        if (pattern_bits() > 63)
            throw infeasible_error("pattern_prob: pattern space wider than 63 bits");
        double p = 1.0;
        const std::uint64_t mask = (1ull << offset_bits) - 1;
        for (std::uint64_t t = 0; t < period; ++t) {
            unsigned shift = static_cast<unsigned>((period - 1 - t) * offset_bits);
            p *= slot(t)[(pattern >> shift) & mask];
        }
        return p;
    }

    std::uint64_t num_patterns() const {
        if (pattern_bits() > 63)
            throw infeasible_error("num_patterns: pattern space wider than 63 bits");
        return 1ull << pattern_bits();
    }

    /// Dense table; only for pattern spaces within the cap.
    std::vector<double> dense(unsigned cap_bits = 24) const {
        if (pattern_bits() > cap_bits)
            throw infeasible_error("pattern table exceeds the dense cap");
        std::vector<double> out(num_patterns());
        for (std::uint64_t e = 0; e < out.size(); ++e) out[e] = pattern_prob(e);
        return out;
    }

    static ErrorPatternDist from_slots(std::vector<std::vector<double>> slots,
                                       unsigned offset_bits, std::uint64_t period,
                                       bool stationary) {
        ErrorPatternDist d;
        d.offset_bits = offset_bits;
        d.period = period;
        d.stationary = stationary;
        d.slot_dists = std::move(slots);
        double log2min = 0.0;
        bool zero = false;
        for (auto& sd : d.slot_dists) {
            double s = 0.0;
            for (double v : sd) s += v;
            if (std::abs(s - 1.0) > 1e-9)
                throw numeric_error("pattern dist: slot distribution does not sum to 1");
            for (double& v : sd) v /= s;
            double m = *std::min_element(sd.begin(), sd.end());
            if (m <= 0.0) zero = true;
            else log2min += std::log2(m);
        }
        std::uint64_t reps = stationary ? period : 1;
        if (zero) {
            d.min_prob = 0.0;
            d.log2_min_prob = -std::numeric_limits<double>::infinity();
        } else {
            d.log2_min_prob = log2min * static_cast<double>(reps);
            d.min_prob = std::exp2(d.log2_min_prob);   // may underflow to 0; log form is primary
        }
        return d;
    }
};

struct PatternDistOptions {
    unsigned dense_cap_bits = 24;
    double abs_tol = 1e-12;
};

/// Per-period pattern distribution for a config under a known running key
/// and one period of plaintext. Slots are independent (i.i.d. Gaussian
/// noise), so the pattern law is the product of per-slot offset laws.
/// True-random DSR draws fresh i.i.d. randomization every slot of every
/// period, which makes all patterns equally likely in the period-averaged
/// law; that idealization is applied here directly.
inline ErrorPatternDist pattern_dist(const Y00Config& cfg, const prng::RunningKey& rk,
                                     const Bits& x, PatternDistOptions opts = {}) {
    cfg.validate();
    if (!rk.t_lcm)
        throw infeasible_error("pattern_dist: generator period unknown; refusing analytics");
    const std::uint64_t T = *rk.t_lcm;
    if (x.size() < T || rk.horizon() < T)
        throw config_error("pattern_dist: need one full period of key and plaintext");

    const unsigned b = log2_exact(cfg.points());
    const std::uint64_t bits = T * b;

    if (cfg.dsr.mode == DsrMode::TrueRandom) {
        std::vector<std::vector<double>> slots(1, std::vector<double>(cfg.points(),
                                               1.0 / cfg.points()));
        return ErrorPatternDist::from_slots(std::move(slots), b, T, true);
    }

    if (bits > opts.dense_cap_bits && cfg.mapping.kind == core::MappingTable::Kind::Scrambled)
        throw infeasible_error(
            "pattern_dist: scrambled mapping outside the dense cap is unsupported");

    // keyed reference indices over one period
    Bits xp(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(T));
    core::SymbolTrace ref;
    if (cfg.dsr.mode == DsrMode::Keyed) {
        auto d = core::dsr_words(cfg, T, 0);
        ref = core::modulate_dsr(rk, xp, d, cfg);
    } else {
        ref = core::modulate(rk, xp, cfg);
    }

    const bool stationary = cfg.geometry == Geometry::PSK &&
                            cfg.mapping.kind != core::MappingTable::Kind::Scrambled;
    std::vector<std::vector<double>> slots;
    if (stationary) {
        slots.push_back(slot_offset_dist(cfg, ref.slots[0].m, opts.abs_tol));
    } else {
        slots.reserve(T);
        for (std::uint64_t t = 0; t < T; ++t)
            slots.push_back(slot_offset_dist(cfg, ref.slots[t].m, opts.abs_tol));
    }
    return ErrorPatternDist::from_slots(std::move(slots), b, T, stationary);
}

} // namespace y00lab::channel
