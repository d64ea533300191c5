#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "y00lab/bits.hpp"
#include "y00lab/channel.hpp"
#include "y00lab/config.hpp"
#include "y00lab/errors.hpp"
#include "y00lab/prng.hpp"
#include "y00lab/rng.hpp"
#include "y00lab/y00core.hpp"

namespace y00lab::keyfresh {

using core::Y00Config;

// ---------------------------------------------------------------------------
// Toeplitz hashing

/// Toeplitz family over GF(2): T[i][j] = seed[(tau - 1) + j - i], so the seed
/// holds the first column (bottom to top) followed by the first row. Output
/// bit i is the parity of row i AND the input. 2-universal by construction.
struct HashSpec {
    unsigned n = 0;     // input width
    unsigned tau = 0;   // output width
    Bits seed;          // n + tau - 1 bits

    void validate() const {
        if (n == 0) throw config_error("hash: input width must be >= 1");
        if (tau > n) throw config_error("hash: output longer than input");
        if (tau > 0 && seed.size() != n + tau - 1)
            throw config_error("hash: seed must be n + tau - 1 bits");
    }

    std::uint8_t entry(unsigned i, unsigned j) const { return seed[(tau - 1) + j - i]; }
};

inline Bits toeplitz_hash(const HashSpec& spec, const Bits& input) {
    spec.validate();
    if (input.size() != spec.n) throw config_error("hash: input width mismatch");
    Bits out(spec.tau, 0);
    for (unsigned i = 0; i < spec.tau; ++i) {
        std::uint8_t acc = 0;
        for (unsigned j = 0; j < spec.n; ++j) acc ^= static_cast<std::uint8_t>(spec.entry(i, j) & input[j]);
        out[i] = acc;
    }
    return out;
}

// ---------------------------------------------------------------------------
// sacrifice amount

struct ExtractorParams {
    double h_inf = 0.0;   // min-entropy available to the extractor, bits
    unsigned tau = 0;     // concrete output length
    double kappa = 0.0;   // claimed lower bound on h_inf
    double epsilon = 0.0;
    double p_th = 0.5;

    void validate() const {
        if (h_inf < kappa) throw config_error("extractor: h_inf below the claimed kappa");
        double eps = std::exp2(0.5 * (static_cast<double>(tau) - h_inf));
        if (std::abs(eps - epsilon) > 1e-12 * std::max(1.0, eps))
            throw config_error("extractor: epsilon inconsistent with tau and h_inf");
    }
};

struct TauChoice {
    unsigned tau = 0;         // floor(h_inf / 3), the concrete hash length
    double tau_real = 0.0;    // h_inf / 3
    double epsilon = 0.0;     // 2^((tau - h_inf)/2) at the integer tau
    double guess_bound = 0.0; // 2 eps + 2^-tau
    double bound_at_optimum = 0.0;  // 3 * 2^(-h_inf/3), the real-valued optimum
};

/// Sacrifice rule: one third of the available min-entropy becomes key.
inline TauChoice optimal_tau(double h_inf) {
    if (h_inf <= 0.0) throw config_error("optimal_tau: no extractable entropy");
    TauChoice c;
    c.tau_real = h_inf / 3.0;
    c.tau = static_cast<unsigned>(std::floor(c.tau_real));
    c.epsilon = std::exp2(0.5 * (static_cast<double>(c.tau) - h_inf));
    c.guess_bound = 2.0 * c.epsilon + std::exp2(-static_cast<double>(c.tau));
    c.bound_at_optimum = 3.0 * std::exp2(-h_inf / 3.0);
    return c;
}

inline double guess_bound_for_tau(double h_inf, unsigned tau) {
    double eps = std::exp2(0.5 * (static_cast<double>(tau) - h_inf));
    return 2.0 * eps + std::exp2(-static_cast<double>(tau));
}

struct GuessBoundReport {
    double bound = 0.0;
    double margin_factor = 0.0;   // p_th / bound
    bool well_below_threshold = false;
};

/// Adversary guessing bound 2 eps + 2^-tau, checked against the security
/// threshold with a configurable margin (default: a factor of 100).
inline GuessBoundReport guess_probability_bound(const ExtractorParams& params,
                                                double margin = 100.0) {
    params.validate();
    GuessBoundReport rep;
    rep.bound = 2.0 * params.epsilon + std::exp2(-static_cast<double>(params.tau));
    rep.margin_factor = params.p_th / rep.bound;
    rep.well_below_threshold = rep.bound <= params.p_th / margin;
    return rep;
}

// ---------------------------------------------------------------------------
// statistical distance from uniform

/// Source with known min-entropy: one input distribution per conditioning
/// value. Conditioning stands for whatever side information the adversary
/// holds.
struct ConditionedSource {
    std::vector<double> cond_probs;               // sums to 1
    std::vector<std::vector<double>> input_dists; // [cond][input], each sums to 1

    void validate(unsigned n) const {
        if (cond_probs.empty() || cond_probs.size() != input_dists.size())
            throw config_error("source: shape mismatch");
        double s = 0.0;
        for (double p : cond_probs) s += p;
        if (std::abs(s - 1.0) > 1e-9) throw config_error("source: cond probs do not sum to 1");
        for (const auto& d : input_dists) {
            if (d.size() != (1ull << n)) throw config_error("source: input alphabet mismatch");
            double t = 0.0;
            for (double p : d) t += p;
            if (std::abs(t - 1.0) > 1e-9) throw config_error("source: input dist does not sum to 1");
        }
    }

    /// Average-conditional min-entropy of the source itself.
    double min_entropy() const {
        double s = 0.0;
        for (std::size_t c = 0; c < cond_probs.size(); ++c) {
            double mx = 0.0;
            for (double p : input_dists[c]) mx = std::max(mx, p);
            s += cond_probs[c] * mx;
        }
        return -std::log2(s);
    }
};

struct DistanceReport {
    double distance = 0.0;        // SD((hash, seed, cond); (uniform, seed, cond))
    double above_sum = 0.0;       // one-sided sum over outputs above 2^-tau
    double below_sum = 0.0;       // one-sided sum over outputs below 2^-tau
    double best_guess = 0.0;      // adversary's best single guess, averaged
    double epsilon = 0.0;
    bool certified = true;        // exact enumeration (false: Monte Carlo estimate)
    std::uint64_t seeds_used = 0;
};

namespace detail {

inline std::uint32_t pack_input(std::uint64_t x) { return static_cast<std::uint32_t>(x); }

/// Output histogram for one seed over all inputs, Gray-code incremental:
/// flipping input bit j toggles the output by column j of the matrix.
inline void seed_histogram(const HashSpec& spec, const std::vector<double>& px,
                           const std::vector<std::uint32_t>& columns,
                           std::vector<double>& hist) {
    std::fill(hist.begin(), hist.end(), 0.0);
    const std::uint64_t total = 1ull << spec.n;
    std::uint32_t out = 0;   // hash of input 0 is 0 by linearity
    std::uint64_t gray_prev = 0;
    hist[0] += px[0];
    for (std::uint64_t k = 1; k < total; ++k) {
        std::uint64_t gray = k ^ (k >> 1);
        std::uint64_t flipped = gray ^ gray_prev;  // single bit
        unsigned j = static_cast<unsigned>(__builtin_ctzll(flipped));
        out ^= columns[j];
        gray_prev = gray;
        hist[out] += px[gray];
    }
}

inline std::vector<std::uint32_t> hash_columns(const HashSpec& spec) {
    // column j as a tau-bit word; word bit i corresponds to output bit i,
    // and input bit j here is the *integer* bit j of the packed input
    std::vector<std::uint32_t> cols(spec.n, 0);
    for (unsigned j = 0; j < spec.n; ++j) {
        unsigned msb_index = spec.n - 1 - j;  // Bits index for integer bit j
        for (unsigned i = 0; i < spec.tau; ++i)
            cols[j] |= static_cast<std::uint32_t>(spec.entry(i, msb_index)) << i;
    }
    return cols;
}

} // namespace detail

/// Statistical distance of (hash output, seed) from (uniform, seed),
/// averaged over conditioning values; exact over all seeds when the work
/// fits the cap, otherwise a flagged Monte Carlo estimate.
inline DistanceReport sd_from_uniform(unsigned n, unsigned tau, const ConditionedSource& source,
                                      bool exact, std::uint64_t mc_seeds = 4096,
                                      std::uint64_t rng_seed = 1,
                                      std::uint64_t work_cap = 1ull << 28) {
    if (n > 20) throw infeasible_error("sd_from_uniform: exact mode limited to n <= 20");
    if (source.cond_probs.size() > (1u << 10))
        throw infeasible_error("sd_from_uniform: conditioning alphabet above 2^10");
    source.validate(n);
    DistanceReport rep;
    if (tau == 0) {  // empty output is trivially uniform
        rep.certified = true;
        return rep;
    }

    const unsigned seed_bits = n + tau - 1;
    const std::uint64_t all_seeds = 1ull << seed_bits;
    const std::uint64_t work_per_seed = (1ull << n) * source.cond_probs.size();
    if (exact && all_seeds > work_cap / std::max<std::uint64_t>(work_per_seed, 1))
        throw infeasible_error("sd_from_uniform: exact enumeration exceeds the cap");
    std::uint64_t n_seeds = exact ? all_seeds : std::min<std::uint64_t>(mc_seeds, all_seeds);
    rep.certified = exact;
    rep.seeds_used = n_seeds;

    const double u = std::exp2(-static_cast<double>(tau));
    std::vector<double> hist(1ull << tau);
    RandomStream rs(rng_seed);
    HashSpec spec{n, tau, Bits(seed_bits, 0)};
    double dist = 0.0, above = 0.0, below = 0.0, guess = 0.0;
    for (std::uint64_t si = 0; si < n_seeds; ++si) {
        std::uint64_t seed_word = exact ? si : (rs.next_u64() & (all_seeds - 1));
        for (unsigned b = 0; b < seed_bits; ++b)
            spec.seed[b] = static_cast<std::uint8_t>((seed_word >> b) & 1);
        auto cols = detail::hash_columns(spec);
        for (std::size_t c = 0; c < source.cond_probs.size(); ++c) {
            detail::seed_histogram(spec, source.input_dists[c], cols, hist);
            double w = source.cond_probs[c] / static_cast<double>(n_seeds);
            double mx = 0.0;
            for (double h : hist) {
                double dev = h - u;
                if (dev >= 0.0) above += w * dev;
                else below -= w * dev;
                mx = std::max(mx, h);
            }
            guess += w * mx;
        }
    }
    dist = 0.5 * (above + below);
    rep.distance = dist;
    rep.above_sum = above;
    rep.below_sum = below;
    rep.best_guess = guess;
    rep.epsilon = std::exp2(0.5 * (static_cast<double>(tau) - source.min_entropy()));
    return rep;
}

// ---------------------------------------------------------------------------
// channel-derived min-entropy estimates

/// Per-slot probability that a quantized tap recovers the plaintext bit when
/// the whole running key is known to the adversary. Knowing the key only
/// helps, so the derived min-entropy is a conservative floor.
inline double eve_bit_guess_success(const Y00Config& cfg, std::uint32_t reference_m) {
    auto g = channel::symbol_error_dist(reference_m, cfg);
    const std::uint32_t n = cfg.points();
    double s = 0.0;
    // ML between the two candidate points an M offset apart, from the
    // quantized symbol decision
    for (std::uint32_t v = 0; v < n; ++v) {
        std::uint32_t d0 = (v - reference_m + n) % n;
        std::uint32_t d1 = (v - (reference_m + cfg.m_levels) + 2 * n) % n;
        s += 0.5 * std::max(g[d0], g[d1]);
    }
    return s;
}

struct HinfEstimate {
    double bits_per_slot = 0.0;
    double total = 0.0;
    bool conservative = true;
};

/// Min-entropy of an x-bit payload against the quantized known-key tap:
/// exact per-slot product for the hard-decision adversary model.
inline HinfEstimate payload_min_entropy(const Y00Config& cfg, std::size_t payload_slots) {
    double worst = 0.0;
    std::uint32_t probe = cfg.geometry == core::Geometry::PSK ? 1 : cfg.points();
    for (std::uint32_t m = 0; m < probe; ++m)
        worst = std::max(worst, eve_bit_guess_success(cfg, m % cfg.points()));
    HinfEstimate e;
    e.bits_per_slot = -std::log2(worst);
    e.total = e.bits_per_slot * static_cast<double>(payload_slots);
    return e;
}

// ---------------------------------------------------------------------------
// refresh round

/// Payload layout: hash seed, then the refresh seed key, then a 32-bit
/// integrity word, each bit repeated `repetition` times on the wire. The
/// layout lengths live in the transcript for auditing only.
struct RefreshMessage {
    unsigned n = 0;
    unsigned tau = 0;
    unsigned repetition = 3;
    Bits hash_seed;
    Bits k_r;

    Bits payload() const {
        Bits p = hash_seed;
        p.insert(p.end(), k_r.begin(), k_r.end());
        Bits crc = crc32_bits(p);
        p.insert(p.end(), crc.begin(), crc.end());
        return p;
    }

    static Bits crc32_bits(const Bits& data) {
        std::uint32_t crc = 0xFFFFFFFFu;
        for (auto bit : data) {
            crc ^= static_cast<std::uint32_t>(bit) << 31;
            crc = (crc & 0x80000000u) ? (crc << 1) ^ 0x04C11DB7u : crc << 1;
        }
        return bits_of_word(~crc, 32);
    }
};

struct RefreshOutcome {
    bool success = false;
    std::string failure_reason;
    Bits alice_key;             // tau bits; set only on success
    Bits bob_key;
    std::size_t slots_used = 0;
    std::size_t corrected_bits = 0;
    std::vector<std::complex<double>> eve_tap;   // transcript for audit
};

struct RefreshOptions {
    unsigned repetition = 5;
    double p_th = 0.5;
    double periods_consumed = 0.0;    // KPA periods already burned on this key
    double n_at_threshold = std::numeric_limits<double>::infinity();
    std::uint64_t rng_seed = 1;
    std::optional<std::size_t> tamper_payload_bit;  // fault injection for tests:
                                                    // flips one decoded payload bit
};

/// End-to-end key refreshment over the cipher channel itself. Both parties
/// end with identical fresh keys or neither changes anything; a failed
/// integrity check aborts the round.
inline RefreshOutcome refresh_roundtrip(const Y00Config& cfg, const Bits& k, const Bits& dk,
                                        unsigned n, unsigned tau, RefreshOptions opts = {}) {
    cfg.validate();
    RefreshOutcome out;
    if (opts.periods_consumed >= opts.n_at_threshold) {
        out.failure_reason = "breach threshold reached; refresh window expired";
        return out;
    }
    if (tau == 0 || tau > n) {
        out.failure_reason = "invalid sacrifice length";
        return out;
    }

    RandomStream rs(opts.rng_seed, 0xF5E5);
    RefreshMessage msg;
    msg.n = n;
    msg.tau = tau;
    msg.repetition = opts.repetition;
    msg.hash_seed.resize(n + tau - 1);
    msg.k_r.resize(n);
    for (auto& b : msg.hash_seed) b = static_cast<std::uint8_t>(rs.next_u64() & 1);
    for (auto& b : msg.k_r) b = static_cast<std::uint8_t>(rs.next_u64() & 1);

    Bits payload = msg.payload();
    Bits wire;
    wire.reserve(payload.size() * opts.repetition);
    for (auto b : payload)
        for (unsigned r = 0; r < opts.repetition; ++r) wire.push_back(b);
    out.slots_used = wire.size();

    auto rk = prng::expand_running_key(k, dk, cfg.prng_s, cfg.prng_dx, cfg.word_width(),
                                       wire.size());
    core::SymbolTrace trace;
    if (cfg.dsr.mode == core::DsrMode::None) {
        trace = core::modulate(rk, wire, cfg);
    } else {
        auto d = core::dsr_words(cfg, wire.size(), mix_seed(opts.rng_seed, 0xD5A));
        trace = core::modulate_dsr(rk, wire, d, cfg);
    }
    out.eve_tap = channel::tap_and_measure(trace, cfg, mix_seed(opts.rng_seed, 0xE7E));
    auto bob_out = channel::bob_receive(trace, cfg, mix_seed(opts.rng_seed, 0xB0B));
    std::optional<std::vector<std::uint32_t>> keyed_d;
    if (cfg.dsr.mode == core::DsrMode::Keyed)
        keyed_d = core::dsr_words(cfg, wire.size(), 0);
    auto decoded = core::demodulate_bob(bob_out, rk, cfg, keyed_d ? &*keyed_d : nullptr);

    // majority vote per payload bit
    Bits bob_payload(payload.size());
    for (std::size_t i = 0; i < payload.size(); ++i) {
        unsigned ones = 0;
        for (unsigned r = 0; r < opts.repetition; ++r) ones += decoded.bits[i * opts.repetition + r];
        bob_payload[i] = ones * 2 > opts.repetition ? 1 : 0;
        if (bob_payload[i] != payload[i]) ++out.corrected_bits;  // residual, pre-CRC
    }
    if (opts.tamper_payload_bit)
        bob_payload[*opts.tamper_payload_bit % bob_payload.size()] ^= 1;

    Bits body(bob_payload.begin(), bob_payload.end() - 32);
    Bits crc_rx(bob_payload.end() - 32, bob_payload.end());
    if (RefreshMessage::crc32_bits(body) != crc_rx) {
        out.failure_reason = "integrity check failed; keys unchanged";
        return out;
    }

    Bits bob_seed(body.begin(), body.begin() + (n + tau - 1));
    Bits bob_kr(body.begin() + (n + tau - 1), body.end());
    HashSpec alice_spec{n, tau, msg.hash_seed};
    HashSpec bob_spec{n, tau, bob_seed};
    out.alice_key = toeplitz_hash(alice_spec, msg.k_r);
    out.bob_key = toeplitz_hash(bob_spec, bob_kr);
    out.success = true;
    return out;
}

} // namespace y00lab::keyfresh
