#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "y00lab/bits.hpp"
#include "y00lab/channel.hpp"
#include "y00lab/config.hpp"
#include "y00lab/errors.hpp"
#include "y00lab/prng.hpp"
#include "y00lab/rng.hpp"
#include "y00lab/y00core.hpp"

namespace y00lab::fca {

using core::Y00Config;

// ---------------------------------------------------------------------------
// linear-recurrence synthesis

struct RecurrenceFit {
    std::vector<std::uint8_t> connection;  // c_1..c_L of s_j = sum c_i s_{j-i}
    unsigned degree = 0;
};

/// Berlekamp-Massey over GF(2): shortest LFSR generating the sequence.
inline RecurrenceFit berlekamp_massey(const Bits& s) {
    const std::size_t n = s.size();
    std::vector<std::uint8_t> c(n + 1, 0), b(n + 1, 0), t;
    c[0] = b[0] = 1;
    unsigned L = 0;
    int m = 1;
    for (std::size_t i = 0; i < n; ++i) {
        std::uint8_t d = s[i];
        for (unsigned j = 1; j <= L; ++j) d ^= static_cast<std::uint8_t>(c[j] & s[i - j]);
        if (d == 0) {
            ++m;
        } else if (2 * L <= i) {
            t = c;
            for (std::size_t j = 0; j + m < c.size(); ++j) c[j + m] ^= b[j];
            L = static_cast<unsigned>(i + 1) - L;
            b = t;
            m = 1;
        } else {
            for (std::size_t j = 0; j + m < c.size(); ++j) c[j + m] ^= b[j];
            ++m;
        }
    }
    RecurrenceFit fit;
    fit.degree = L;
    fit.connection.assign(c.begin() + 1, c.begin() + 1 + L);
    return fit;
}

/// Known-plaintext break of the conventional stream cipher: the keystream is
/// c XOR x, and enough of it pins the seed with certainty.
inline Bits recover_key_conventional(const Bits& c, const Bits& x, const prng::LfsrSpec& spec) {
    spec.validate();
    if (c.size() != x.size()) throw config_error("recover_key: |c| != |x|");
    if (c.size() < 2 * spec.degree)
        throw config_error("recover_key: need at least 2L keystream bits");
    Bits s = xor_bits(c, x);
    RecurrenceFit fit = berlekamp_massey(s);
    if (fit.degree > spec.degree)
        throw config_error("recover_key: keystream needs a longer register than the spec");
    Bits seed(s.begin(), s.begin() + spec.degree);
    prng::LfsrSpec check = spec;
    check.seed = seed;
    if (prng::lfsr_stream(check, s.size()) != s)
        throw config_error("recover_key: keystream inconsistent with the declared taps");
    return seed;
}

// ---------------------------------------------------------------------------
// leaky-bit extraction

/// Per-slot keystream-bit estimates from the tap. `bits[t]` estimates the
/// generator stream at position stride*t + offset; crossover is the analytic
/// per-slot error probability of that estimate.
struct NoisyKeystream {
    Bits bits;
    std::vector<double> crossover;
    unsigned stride = 1;      // generator bits consumed per slot
    unsigned offset = 0;      // stream position of the designated bit within a slot
    unsigned word_bit = 0;    // designated bit index within s(t), 0 = least significant
    bool inverted = false;    // estimates are the complement of the observable
    bool has_leak = false;

    double mean_crossover() const {
        if (crossover.empty()) return 0.5;
        double s = 0.0;
        for (double v : crossover) s += v;
        return s / static_cast<double>(crossover.size());
    }
};

namespace detail {

/// Analytic agreement of the low detected-base bit with each bit of s(t),
/// averaged over uniform s, both bands, and the offset distribution. DSR
/// randomization is folded in as a uniform base re-draw.
inline std::vector<double> observable_crossovers(const Y00Config& cfg) {
    const std::uint32_t M = cfg.m_levels;
    const unsigned w = cfg.word_width();
    const std::uint32_t n = cfg.points();
    const bool randomized = cfg.dsr.mode != core::DsrMode::None;

    std::vector<std::vector<double>> dist_cache(n);
    auto dist_for = [&](std::uint32_t m) -> const std::vector<double>& {
        if (dist_cache[m].empty()) {
            if (cfg.geometry == core::Geometry::PSK && !dist_cache[0].empty())
                dist_cache[m] = dist_cache[0];  // shift invariant
            else
                dist_cache[m] = channel::symbol_error_dist(m, cfg);
        }
        return dist_cache[m];
    };

    std::vector<double> p(w, 0.0);
    const double norm = 1.0 / (2.0 * M * (randomized ? M : 1));
    for (std::uint32_t s = 0; s < M; ++s) {
        for (std::uint32_t band = 0; band < 2; ++band) {
            for (std::uint32_t d = 0; d < (randomized ? M : 1u); ++d) {
                std::uint32_t base = cfg.mapping.table[randomized ? (s ^ d) : s];
                std::uint32_t true_m = base + M * band;
                const auto& g = dist_for(true_m);
                for (std::uint32_t delta = 0; delta < n; ++delta) {
                    std::uint32_t observed_low = (true_m + delta) & 1u;
                    for (unsigned i = 0; i < w; ++i)
                        if (observed_low != ((s >> i) & 1u)) p[i] += g[delta] * norm;
                }
            }
        }
    }
    return p;
}

} // namespace detail

struct LeakModel {
    unsigned word_bit = 0;
    double crossover = 0.5;
    bool inverted = false;
    bool has_leak = false;
};

/// Picks the keystream bit best estimated by the low bit of the detected
/// base index. A mapping that keeps every candidate near 1/2 disables the
/// attack; that is the well-designed case.
inline LeakModel analyze_leak(const Y00Config& cfg, double margin = 0.02) {
    cfg.validate();
    LeakModel lm;
    if (cfg.mapping.kind == core::MappingTable::Kind::Scrambled)
        return lm;  // keyed per-slot permutation: no fixed observable-to-bit alignment
    std::vector<double> p = detail::observable_crossovers(cfg);
    double best = 0.5;
    for (unsigned i = 0; i < p.size(); ++i) {
        double eff = std::min(p[i], 1.0 - p[i]);
        if (eff < best) {
            best = eff;
            lm.word_bit = i;
            lm.inverted = p[i] > 0.5;
        }
    }
    lm.crossover = best;
    lm.has_leak = best < 0.5 - margin;
    return lm;
}

/// Hard-decision keystream estimates from Eve's quantized symbol decisions.
inline NoisyKeystream extract_leaky_bits(const std::vector<std::uint32_t>& detected,
                                         const Y00Config& cfg, double margin = 0.02) {
    LeakModel lm = analyze_leak(cfg, margin);
    NoisyKeystream ks;
    ks.stride = cfg.word_width();
    ks.word_bit = lm.word_bit;
    ks.offset = cfg.word_width() - 1 - lm.word_bit;  // MSB-first chop
    ks.inverted = lm.inverted;
    ks.has_leak = lm.has_leak;
    if (!lm.has_leak) return ks;
    ks.bits.resize(detected.size());
    ks.crossover.assign(detected.size(), lm.crossover);
    for (std::size_t t = 0; t < detected.size(); ++t) {
        std::uint8_t b = static_cast<std::uint8_t>(detected[t] & 1u);
        ks.bits[t] = lm.inverted ? static_cast<std::uint8_t>(b ^ 1u) : b;
    }
    return ks;
}

// ---------------------------------------------------------------------------
// parity checks

/// Sparse parity checks valid on every noise-free stream of the register:
/// the feedback polynomial and its GF(2) squares, anchored anywhere.
struct ParityCheckSet {
    std::vector<std::vector<std::uint32_t>> checks;  // ascending offsets, first = 0

    std::size_t weight() const { return checks.empty() ? 0 : checks[0].size(); }
};

inline ParityCheckSet derive_parity_checks(const prng::LfsrSpec& spec, unsigned max_weight,
                                           std::size_t horizon) {
    spec.validate();
    auto period = prng::generator_period(
        prng::GeneratorSpec::make_lfsr(spec.degree, spec.taps, spec.seed));
    if (period && horizon > *period)
        throw config_error("parity checks: horizon exceeds the generator period");

    std::vector<std::uint32_t> base;
    base.push_back(0);
    for (unsigned c : spec.taps) base.push_back(c);
    std::sort(base.begin(), base.end());

    ParityCheckSet out;
    if (base.size() > max_weight) return out;
    for (unsigned k = 0;; ++k) {
        std::uint64_t scale = 1ull << k;
        if (static_cast<std::uint64_t>(base.back()) * scale >= horizon) break;
        std::vector<std::uint32_t> chk;
        for (auto e : base) chk.push_back(static_cast<std::uint32_t>(e * scale));
        out.checks.push_back(std::move(chk));
    }

    // every check must annihilate a noise-free stream
    std::size_t vlen = std::max<std::size_t>(horizon, 3 * spec.degree + 64);
    if (period) vlen = std::max(vlen, static_cast<std::size_t>(std::min<std::uint64_t>(
                                          3 * *period, 1ull << 20)));
    Bits ref = prng::lfsr_stream(spec, vlen);
    for (const auto& chk : out.checks) {
        for (std::size_t t = 0; t + chk.back() < ref.size(); ++t) {
            std::uint8_t v = 0;
            for (auto e : chk) v ^= ref[t + e];
            if (v) throw numeric_error("parity checks: derived check fails on a clean stream");
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// iterative decoding and seed synthesis

struct AttackOptions {
    unsigned max_rounds = 200;
    double min_crossover_model = 0.02;
    double margin = 0.02;
};

struct AttackResult {
    Bits seed;                 // candidate seed of the target register
    double confidence = 0.0;   // fraction of satisfied checks at exit
    bool converged = false;
    unsigned iterations = 0;
    bool applicable = false;
};

namespace detail {

/// GF(2) expression of stream bit a_j as a mask over the seed bits.
inline std::vector<std::uint64_t> stream_rows(const prng::LfsrSpec& spec, std::size_t n) {
    auto offs = spec.recurrence_offsets();
    std::vector<std::uint64_t> rows(std::max<std::size_t>(n, spec.degree));
    for (unsigned j = 0; j < spec.degree; ++j) rows[j] = 1ull << j;
    for (std::size_t t = 0; t + spec.degree < rows.size(); ++t) {
        std::uint64_t r = 0;
        for (auto e : offs) r ^= rows[t + e];
        rows[t + spec.degree] = r;
    }
    return rows;
}

/// Solve for the seed from (position, value) equations; nullopt if singular.
inline std::optional<Bits> solve_seed(const prng::LfsrSpec& spec,
                                      const std::vector<std::uint64_t>& rows,
                                      const std::vector<std::pair<std::size_t, std::uint8_t>>& eqs) {
    const unsigned L = spec.degree;
    std::vector<std::uint64_t> m;
    std::vector<std::uint8_t> rhs;
    for (auto [pos, val] : eqs) {
        m.push_back(rows[pos]);
        rhs.push_back(val);
    }
    unsigned rank = 0;
    std::vector<unsigned> pivot_col;
    for (unsigned col = 0; col < L && rank < m.size(); ++col) {
        std::size_t piv = rank;
        while (piv < m.size() && !((m[piv] >> col) & 1)) ++piv;
        if (piv == m.size()) continue;
        std::swap(m[rank], m[piv]);
        std::swap(rhs[rank], rhs[piv]);
        for (std::size_t r = 0; r < m.size(); ++r) {
            if (r != rank && ((m[r] >> col) & 1)) {
                m[r] ^= m[rank];
                rhs[r] ^= rhs[rank];
            }
        }
        pivot_col.push_back(col);
        ++rank;
    }
    if (rank < L) return std::nullopt;
    Bits seed(L, 0);
    for (unsigned r = 0; r < rank; ++r) seed[pivot_col[r]] = rhs[r];
    return seed;
}

} // namespace detail

/// Iterative bit-flip decoding of the noisy keystream against the parity
/// checks, then seed synthesis over GF(2). Bits are flipped when their
/// unsatisfied-check count clears a likelihood threshold; the working error
/// rate anneals as rounds converge.
inline AttackResult correlation_attack(const NoisyKeystream& ks, const ParityCheckSet& checks,
                                       const prng::LfsrSpec& spec, AttackOptions opts = {}) {
    spec.validate();
    AttackResult res;
    if (!ks.has_leak || checks.checks.empty()) return res;
    double p = ks.mean_crossover();
    if (p >= 0.5 - opts.margin) return res;
    res.applicable = true;

    const std::size_t n = ks.bits.size();
    Bits bits = ks.bits;
    const unsigned others = static_cast<unsigned>(checks.weight()) - 1;
    p = std::max(p, opts.min_crossover_model);

    std::vector<std::uint32_t> unsat(n), nch(n);
    std::uint64_t total_unsat = 0, total_checks = 0;
    auto tally = [&]() {
        std::fill(unsat.begin(), unsat.end(), 0);
        std::fill(nch.begin(), nch.end(), 0);
        total_unsat = total_checks = 0;
        for (const auto& chk : checks.checks) {
            if (chk.back() >= n) continue;
            const std::size_t anchors = n - chk.back();
            total_checks += anchors;
            for (std::size_t t = 0; t < anchors; ++t) {
                std::uint8_t syn = 0;
                for (auto e : chk) syn ^= bits[t + e];
                if (syn) {
                    ++total_unsat;
                    for (auto e : chk) ++unsat[t + e];
                }
                for (auto e : chk) ++nch[t + e];
            }
        }
    };

    unsigned round = 0;
    for (; round < opts.max_rounds; ++round) {
        tally();
        if (total_unsat == 0) break;
        double s = std::pow(1.0 - 2.0 * p, static_cast<double>(others));
        double bias = std::log((1.0 - p) / p) / (2.0 * std::log((1.0 + s) / (1.0 - s)));
        bool flipped = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (nch[i] == 0) continue;
            if (unsat[i] > 0.5 * nch[i] + bias) {
                bits[i] ^= 1;
                flipped = true;
            }
        }
        p = std::max(p * (flipped ? 0.85 : 0.8), opts.min_crossover_model);
    }
    tally();
    res.converged = total_unsat == 0;
    res.iterations = round;
    res.confidence =
        total_checks ? 1.0 - static_cast<double>(total_unsat) / static_cast<double>(total_checks)
                     : 0.0;

    // seed synthesis: corrected bit t sits at stream position stride*t + offset
    auto rows = detail::stream_rows(spec, ks.stride * n + ks.offset + 1);
    std::vector<std::pair<std::size_t, std::uint8_t>> eqs;
    for (std::size_t t = 0; t < std::min<std::size_t>(n, 8 * spec.degree); ++t)
        eqs.emplace_back(ks.stride * t + ks.offset, bits[t]);
    auto seed = detail::solve_seed(spec, rows, eqs);
    if (seed && any_bit(*seed)) {
        res.seed = *seed;
    } else {
        res.seed = Bits(spec.degree, 0);
        res.converged = false;
    }
    return res;
}

// ---------------------------------------------------------------------------
// end-to-end trial driver

struct TrialOutcome {
    bool recovered = false;
    bool leak_found = false;
    bool attack_ran = false;
    unsigned iterations = 0;
    double confidence = 0.0;
    double measured_crossover = 0.5;
};

/// One full attack trial: random keys and plaintext, modulation, the tapped
/// heterodyne record, quantized decisions, extraction, decoding. With no
/// leak the adversary falls back to a uniform random seed guess.
inline TrialOutcome run_attack_trial(const Y00Config& cfg, std::size_t horizon,
                                     std::uint64_t trial_seed, AttackOptions opts = {}) {
    cfg.validate();
    if (cfg.prng_s.kind != prng::GeneratorSpec::Kind::Lfsr)
        throw config_error("attack trial: the harness targets LFSR s generators");

    RandomStream key_rs(trial_seed, 0xA11CE);
    auto random_seed_bits = [&](unsigned width) {
        Bits b(width);
        do {
            for (auto& v : b) v = static_cast<std::uint8_t>(key_rs.next_u64() & 1);
        } while (!any_bit(b));
        return b;
    };

    Bits k = random_seed_bits(cfg.prng_s.seed_width());
    Bits dk = random_seed_bits(cfg.prng_dx.seed_width());
    Bits x(horizon);
    for (auto& v : x) v = static_cast<std::uint8_t>(key_rs.next_u64() & 1);

    auto rk = prng::expand_running_key(k, dk, cfg.prng_s, cfg.prng_dx, cfg.word_width(), horizon);
    core::SymbolTrace trace;
    if (cfg.dsr.mode == core::DsrMode::None) {
        trace = core::modulate(rk, x, cfg);
    } else {
        auto d = core::dsr_words(cfg, horizon, mix_seed(trial_seed, 0xD5A));
        trace = core::modulate_dsr(rk, x, d, cfg);
    }
    auto outcomes = channel::tap_and_measure(trace, cfg, mix_seed(trial_seed, 0xE7E));
    auto regions = channel::DecisionRegionSet::for_eve(cfg);
    std::vector<std::uint32_t> detected(horizon);
    for (std::size_t t = 0; t < horizon; ++t) detected[t] = channel::decide_symbol(outcomes[t], regions);

    TrialOutcome out;
    NoisyKeystream ks = extract_leaky_bits(detected, cfg, opts.margin);
    out.leak_found = ks.has_leak;
    if (!ks.has_leak) {
        Bits guess = random_seed_bits(cfg.prng_s.seed_width());
        out.recovered = guess == k;
        return out;
    }
    out.measured_crossover = ks.mean_crossover();

    auto checks = derive_parity_checks(cfg.prng_s.lfsr, 5, horizon);
    AttackResult ar = correlation_attack(ks, checks, cfg.prng_s.lfsr, opts);
    out.attack_ran = ar.applicable;
    out.iterations = ar.iterations;
    out.confidence = ar.confidence;
    out.recovered = ar.applicable && ar.seed == k;
    return out;
}

} // namespace y00lab::fca
