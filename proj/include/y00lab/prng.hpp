#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "y00lab/bits.hpp"
#include "y00lab/errors.hpp"

namespace y00lab::prng {

/// Fibonacci LFSR over GF(2) with characteristic polynomial
///   p(x) = x^L + sum_{c in taps, c != L} x^c + 1.
/// The output sequence a_t starts with the seed (seed[0] = a_0, emitted
/// first) and obeys a_{t+L} = XOR of a_{t+e} over e in ({0} u taps) \ {L}.
struct LfsrSpec {
    unsigned degree = 0;          // L
    std::set<unsigned> taps;      // positions in [1, L]; must contain L
    Bits seed;                    // L bits, nonzero

    void validate() const {
        if (degree == 0 || degree > 63) throw config_error("lfsr: degree must be in [1, 63]");
        if (taps.empty()) throw config_error("lfsr: taps must be nonempty");
        if (taps.count(degree) == 0) throw config_error("lfsr: taps must include the degree");
        for (unsigned c : taps)
            if (c < 1 || c > degree) throw config_error("lfsr: tap out of range");
        if (seed.size() != degree) throw config_error("lfsr: seed width != degree");
        if (!any_bit(seed)) throw config_error("lfsr: seed must be nonzero");
    }

    /// Recurrence term offsets: ({0} u taps) \ {L}.
    std::vector<unsigned> recurrence_offsets() const {
        std::set<unsigned> e = taps;
        e.insert(0);
        e.erase(degree);
        return {e.begin(), e.end()};
    }
};

/// Keyed counter generator: a small ARX-style permutation of [0, 2^width)
/// applied to a running counter, one output bit per counter value. The bit
/// stream period is exactly 2^width by construction. A statistical stand-in
/// for an arbitrary well-behaved PRNG, not a cryptographic primitive.
struct KeyedCounterSpec {
    Bits key;                 // 64 bits
    unsigned rounds = 4;
    unsigned width = 32;      // block width in [4, 63]

    void validate() const {
        if (key.size() != 64) throw config_error("keyed counter: key must be 64 bits");
        if (rounds < 1 || rounds > 16) throw config_error("keyed counter: rounds in [1, 16]");
        if (width < 4 || width > 63) throw config_error("keyed counter: width in [4, 63]");
    }

    std::uint64_t permute(std::uint64_t v) const {
        const std::uint64_t mask = (width == 63) ? ~0ull >> 1 : (1ull << width) - 1;
        const std::uint64_t k0 = word_msb_first(key, 0, 32);
        const std::uint64_t k1 = word_msb_first(key, 32, 32);
        const unsigned s1 = 1 + (13 % (width - 1));
        const unsigned s2 = 1 + (7 % (width - 1));
        const unsigned s3 = 1 + (3 % (width - 1));
        std::uint64_t x = v & mask;
        for (unsigned r = 0; r < rounds; ++r) {
            x = (x + k0 + r) & mask;
            x ^= (x << s1) & mask;
            x ^= x >> s2;
            x ^= (x << s3) & mask;
            x = (x * 0x9E3779B97F4A7C15ull) & mask;  // odd multiplier: bijective mod 2^width
            x ^= k1 & mask;
        }
        return x;
    }
};

struct GeneratorSpec {
    enum class Kind { Lfsr, KeyedCounter };
    Kind kind = Kind::Lfsr;
    LfsrSpec lfsr;
    KeyedCounterSpec counter;

    static GeneratorSpec make_lfsr(unsigned degree, std::set<unsigned> taps, Bits seed) {
        GeneratorSpec g;
        g.kind = Kind::Lfsr;
        g.lfsr = LfsrSpec{degree, std::move(taps), std::move(seed)};
        g.lfsr.validate();
        return g;
    }

    static GeneratorSpec make_counter(Bits key, unsigned rounds = 4, unsigned width = 32) {
        GeneratorSpec g;
        g.kind = Kind::KeyedCounter;
        g.counter = KeyedCounterSpec{std::move(key), rounds, width};
        g.counter.validate();
        return g;
    }

    void validate() const {
        if (kind == Kind::Lfsr) lfsr.validate();
        else counter.validate();
    }

    unsigned seed_width() const {
        return kind == Kind::Lfsr ? lfsr.degree : 64;
    }

    /// Same generator with the seed material replaced.
    GeneratorSpec with_seed(const Bits& s) const {
        GeneratorSpec g = *this;
        if (kind == Kind::Lfsr) g.lfsr.seed = s;
        else g.counter.key = s;
        g.validate();
        return g;
    }
};

/// Single-owner bit stream over a generator.
class BitStream {
public:
    explicit BitStream(const GeneratorSpec& spec) : spec_(spec) {
        spec_.validate();
        if (spec_.kind == GeneratorSpec::Kind::Lfsr) {
            const auto& l = spec_.lfsr;
            for (unsigned i = 0; i < l.degree; ++i)
                state_ |= static_cast<std::uint64_t>(l.seed[i]) << i;
            offsets_ = l.recurrence_offsets();
        }
    }

    std::uint8_t next() {
        if (spec_.kind == GeneratorSpec::Kind::Lfsr) {
            const unsigned L = spec_.lfsr.degree;
            std::uint8_t out = static_cast<std::uint8_t>(state_ & 1u);
            std::uint64_t fb = 0;
            for (unsigned e : offsets_) fb ^= (state_ >> e) & 1u;
            state_ = (state_ >> 1) | (fb << (L - 1));
            return out;
        }
        const std::uint64_t mask = (1ull << spec_.counter.width) - 1;
        std::uint8_t out = static_cast<std::uint8_t>(spec_.counter.permute(counter_) & 1u);
        counter_ = (counter_ + 1) & mask;
        return out;
    }

    Bits take(std::size_t n) {
        Bits out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = next();
        return out;
    }

    std::uint64_t lfsr_state() const { return state_; }

private:
    GeneratorSpec spec_;
    std::uint64_t state_ = 0;
    std::uint64_t counter_ = 0;
    std::vector<unsigned> offsets_;
};

inline Bits lfsr_stream(const LfsrSpec& spec, std::size_t n) {
    GeneratorSpec g;
    g.kind = GeneratorSpec::Kind::Lfsr;
    g.lfsr = spec;
    BitStream bs(g);
    return bs.take(n);
}

constexpr std::uint64_t kDefaultPeriodCap = 1ull << 24;

/// Bit-stream period, or nullopt when the search exceeds `cap` steps.
/// Never guesses: an unknown period is reported as unknown.
inline std::optional<std::uint64_t> generator_period(const GeneratorSpec& spec,
                                                     std::uint64_t cap = kDefaultPeriodCap) {
    spec.validate();
    if (spec.kind == GeneratorSpec::Kind::KeyedCounter)
        return 1ull << spec.counter.width;  // counter wrap, by construction
    BitStream bs(spec);
    const std::uint64_t start = bs.lfsr_state();
    for (std::uint64_t steps = 1; steps <= cap; ++steps) {
        bs.next();
        if (bs.lfsr_state() == start) return steps;
    }
    return std::nullopt;
}

struct PeriodReport {
    std::optional<std::uint64_t> p1, p2, t_lcm;
};

/// Exact LCM of the two generator periods; any unknown input or 64-bit
/// overflow yields an unknown t_lcm.
inline PeriodReport compute_periods(const GeneratorSpec& g1, const GeneratorSpec& g2,
                                    std::uint64_t cap = kDefaultPeriodCap) {
    PeriodReport r;
    r.p1 = generator_period(g1, cap);
    r.p2 = generator_period(g2, cap);
    if (r.p1 && r.p2) {
        unsigned __int128 g = std::gcd(*r.p1, *r.p2);
        unsigned __int128 l = (static_cast<unsigned __int128>(*r.p1) / g) * *r.p2;
        if (l <= static_cast<unsigned __int128>(UINT64_MAX))
            r.t_lcm = static_cast<std::uint64_t>(l);
    }
    return r;
}

/// Running key pair expanded from the shared secrets: s(t) words chopped
/// MSB-first from the s generator, one dx bit per slot from the other.
struct RunningKey {
    std::vector<std::uint32_t> s;   // one word per slot, word_width bits each
    Bits dx;                        // one bit per slot
    std::optional<std::uint64_t> t_lcm;
    unsigned word_width = 1;

    std::size_t horizon() const { return s.size(); }
};

inline RunningKey expand_running_key(const Bits& k, const Bits& dk,
                                     const GeneratorSpec& s_gen, const GeneratorSpec& dx_gen,
                                     unsigned word_width, std::size_t horizon,
                                     std::uint64_t period_cap = kDefaultPeriodCap) {
    if (word_width == 0 || word_width > 16)
        throw config_error("running key: word width out of range");
    if (k.size() != s_gen.seed_width())
        throw config_error("running key: |k| does not match the s generator seed width");
    if (dk.size() != dx_gen.seed_width())
        throw config_error("running key: |dk| does not match the dx generator seed width");

    GeneratorSpec gs = s_gen.with_seed(k);
    GeneratorSpec gd = dx_gen.with_seed(dk);

    RunningKey rk;
    rk.word_width = word_width;
    rk.t_lcm = compute_periods(gs, gd, period_cap).t_lcm;
    rk.s.resize(horizon);
    BitStream sbits(gs);
    for (std::size_t t = 0; t < horizon; ++t) {
        std::uint32_t w = 0;
        for (unsigned i = 0; i < word_width; ++i) w = (w << 1) | sbits.next();
        rk.s[t] = w;
    }
    BitStream dxbits(gd);
    rk.dx = dxbits.take(horizon);
    return rk;
}

} // namespace y00lab::prng
