#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "y00lab/bits.hpp"
#include "y00lab/config.hpp"
#include "y00lab/errors.hpp"
#include "y00lab/prng.hpp"
#include "y00lab/rng.hpp"

namespace y00lab::core {

struct SymbolSlot {
    std::uint64_t t = 0;
    std::uint32_t m = 0;              // transmitted index in [0, 2M)
    std::complex<double> amp;         // transmitted amplitude alpha[m]
    std::uint8_t x = 0;               // plaintext bit
    std::uint32_t d = 0;              // randomization word (when DSR active)
    bool has_d = false;
};

struct SymbolTrace {
    std::vector<SymbolSlot> slots;
    std::uint32_t m_levels = 0;

    std::size_t size() const { return slots.size(); }
};

/// Symbol index: base band selected by the mapped key word, plus an M offset
/// carrying the masked plaintext bit.
inline std::uint32_t encode_index(std::uint32_t mapped_base, std::uint32_t parity_base,
                                  std::uint8_t x, std::uint8_t dx, std::uint32_t m_levels) {
    std::uint32_t band = (parity_base + x + dx) & 1u;
    return mapped_base + m_levels * band;
}

/// Plain encoder: m(t) from the running key and the plaintext, no DSR.
inline SymbolTrace modulate(const prng::RunningKey& rk, const Bits& x, const Y00Config& cfg) {
    cfg.validate();
    if (cfg.dsr.mode != DsrMode::None)
        throw config_error("modulate: config declares DSR; use modulate_dsr");
    if (x.size() > rk.horizon())
        throw config_error("modulate: plaintext longer than the running key");
    if (rk.word_width != cfg.word_width())
        throw config_error("modulate: running key word width != log2 M");

    MappingSequence map(cfg.mapping, x.size());
    SymbolTrace tr;
    tr.m_levels = cfg.m_levels;
    tr.slots.resize(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) {
        std::uint32_t mapped = map.at(t)[rk.s[t]];
        std::uint32_t m = encode_index(mapped, mapped, x[t], rk.dx[t], cfg.m_levels);
        tr.slots[t] = {t, m, cfg.amplitude(m), x[t], 0, false};
    }
    return tr;
}

/// DSR words for the transmitter: keyed mode expands them from the DSR
/// generator, true-random mode draws them i.i.d. from the run's entropy
/// stream. One word of log2(M) bits per slot.
inline std::vector<std::uint32_t> dsr_words(const Y00Config& cfg, std::size_t horizon,
                                            std::uint64_t entropy_seed) {
    std::vector<std::uint32_t> d(horizon, 0);
    const unsigned w = cfg.word_width();
    if (cfg.dsr.mode == DsrMode::Keyed) {
        prng::BitStream s(cfg.dsr.gen);
        for (std::size_t t = 0; t < horizon; ++t) {
            std::uint32_t v = 0;
            for (unsigned i = 0; i < w; ++i) v = (v << 1) | s.next();
            d[t] = v;
        }
    } else if (cfg.dsr.mode == DsrMode::TrueRandom) {
        for (std::size_t t = 0; t < horizon; ++t) {
            RandomStream rs(entropy_seed, t);
            d[t] = static_cast<std::uint32_t>(rs.next_below(cfg.m_levels));
        }
    }
    return d;
}

/// DSR encoder: the base band is re-selected through the mapping of s XOR d,
/// while the plaintext offset term keeps the mapping of s itself.
inline SymbolTrace modulate_dsr(const prng::RunningKey& rk, const Bits& x,
                                const std::vector<std::uint32_t>& d, const Y00Config& cfg) {
    cfg.validate();
    if (cfg.dsr.mode == DsrMode::None)
        throw config_error("modulate_dsr: config declares no DSR");
    if (x.size() > rk.horizon())
        throw config_error("modulate_dsr: plaintext longer than the running key");
    if (d.size() < x.size())
        throw config_error("modulate_dsr: missing DSR words");
    if (rk.word_width != cfg.word_width())
        throw config_error("modulate_dsr: running key word width != log2 M");

    MappingSequence map(cfg.mapping, x.size());
    SymbolTrace tr;
    tr.m_levels = cfg.m_levels;
    tr.slots.resize(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) {
        if (d[t] >= cfg.m_levels)
            throw config_error("modulate_dsr: DSR word wider than log2 M bits");
        const auto& tab = map.at(t);
        std::uint32_t base = tab[rk.s[t] ^ d[t]];
        std::uint32_t par = tab[rk.s[t]];
        std::uint32_t m = encode_index(base, par, x[t], rk.dx[t], cfg.m_levels);
        tr.slots[t] = {t, m, cfg.amplitude(m), x[t], d[t], true};
    }
    return tr;
}

struct DecodeResult {
    Bits bits;
    std::optional<std::size_t> errors;  // vs ground truth, when provided
};

/// Keyed binary decision per slot. With no DSR (or keyed DSR words supplied)
/// Bob knows both hypothesis points exactly and takes the nearer one. Under
/// true-random DSR he cannot know the base band, but the plaintext term is a
/// pure M offset, so he quantizes to the nearest constellation point and
/// reads the band bit.
inline DecodeResult demodulate_bob(const std::vector<std::complex<double>>& outcomes,
                                   const prng::RunningKey& rk, const Y00Config& cfg,
                                   const std::vector<std::uint32_t>* keyed_d = nullptr,
                                   const Bits* truth = nullptr) {
    cfg.validate();
    if (outcomes.size() > rk.horizon())
        throw config_error("demodulate: more outcomes than running-key horizon");
    if (cfg.dsr.mode == DsrMode::Keyed && keyed_d == nullptr)
        throw config_error("demodulate: keyed DSR requires the shared d words");

    const double scale = cfg.bob_scale();
    MappingSequence map(cfg.mapping, outcomes.size());
    DecodeResult res;
    res.bits.resize(outcomes.size());
    std::size_t nerr = 0;

    for (std::size_t t = 0; t < outcomes.size(); ++t) {
        const auto& tab = map.at(t);
        std::uint32_t par = tab[rk.s[t]];
        std::uint8_t bit;
        if (cfg.dsr.mode == DsrMode::TrueRandom) {
            // nearest of the 2M scaled points, then the band bit
            std::uint32_t best = 0;
            double bestd = 1e300;
            for (std::uint32_t m = 0; m < cfg.points(); ++m) {
                double dd = std::norm(outcomes[t] - scale * cfg.amplitude(m));
                if (dd < bestd) { bestd = dd; best = m; }
            }
            std::uint8_t band = best >= cfg.m_levels ? 1 : 0;
            bit = band ^ static_cast<std::uint8_t>((par + rk.dx[t]) & 1u);
        } else {
            std::uint32_t base = par;
            if (cfg.dsr.mode == DsrMode::Keyed) base = tab[rk.s[t] ^ (*keyed_d)[t]];
            std::uint32_t m0 = encode_index(base, par, 0, rk.dx[t], cfg.m_levels);
            std::uint32_t m1 = encode_index(base, par, 1, rk.dx[t], cfg.m_levels);
            double d0 = std::norm(outcomes[t] - scale * cfg.amplitude(m0));
            double d1 = std::norm(outcomes[t] - scale * cfg.amplitude(m1));
            bit = d1 < d0 ? 1 : 0;
        }
        res.bits[t] = bit;
        if (truth && t < truth->size() && bit != (*truth)[t]) ++nerr;
    }
    if (truth) res.errors = nerr;
    return res;
}

} // namespace y00lab::core
