#pragma once

#include <cstdint>
#include <vector>

#include "y00lab/bits.hpp"
#include "y00lab/errors.hpp"
#include "y00lab/prng.hpp"
#include "y00lab/rng.hpp"

namespace y00lab::core {

inline bool is_permutation_table(const std::vector<std::uint32_t>& t) {
    std::vector<bool> seen(t.size(), false);
    for (auto v : t) {
        if (v >= t.size() || seen[v]) return false;
        seen[v] = true;
    }
    return true;
}

inline std::uint32_t bit_reverse(std::uint32_t v, unsigned width) {
    std::uint32_t out = 0;
    for (unsigned i = 0; i < width; ++i) out |= ((v >> i) & 1u) << (width - 1 - i);
    return out;
}

/// Default irregular table, version v1: bit reversal composed with a fixed
/// scrambling permutation whose low output bit equals the input parity. The
/// parity property keeps every input bit at zero correlation with the low
/// output bit, which is the band feature a hard-decision tap reads best.
inline std::vector<std::uint32_t> irregular_table_v1(std::uint32_t m_levels) {
    if (!is_power_of_two(m_levels) || m_levels < 2)
        throw config_error("mapping: M must be a power of two >= 2");
    const unsigned w = log2_exact(m_levels);
    const std::uint32_t half = m_levels >> 1;
    std::vector<std::uint32_t> table(m_levels);
    for (std::uint32_t s = 0; s < m_levels; ++s) {
        std::uint32_t u = bit_reverse(s, w);
        std::uint32_t par = static_cast<std::uint32_t>(__builtin_popcount(u) & 1);
        std::uint32_t hi = u >> 1;
        std::uint32_t sigma = half > 1 ? (((hi ^ (hi >> 1)) * 5u + 3u) & (half - 1)) : 0u;
        table[s] = (sigma << 1) | par;
    }
    return table;
}

struct MappingTable {
    enum class Kind { Regular, Irregular, Scrambled, Explicit };
    Kind kind = Kind::Regular;
    std::vector<std::uint32_t> table;          // fixed permutation (all kinds except Scrambled)
    prng::GeneratorSpec scramble;              // drives per-slot redraws when Scrambled

    static MappingTable regular(std::uint32_t m_levels) {
        MappingTable m;
        m.kind = Kind::Regular;
        m.table.resize(m_levels);
        for (std::uint32_t i = 0; i < m_levels; ++i) m.table[i] = i;
        return m;
    }

    static MappingTable irregular(std::uint32_t m_levels) {
        MappingTable m;
        m.kind = Kind::Irregular;
        m.table = irregular_table_v1(m_levels);
        return m;
    }

    static MappingTable explicit_table(std::vector<std::uint32_t> t) {
        MappingTable m;
        m.kind = Kind::Explicit;
        m.table = std::move(t);
        if (!is_permutation_table(m.table))
            throw config_error("mapping: explicit table is not a permutation");
        return m;
    }

    static MappingTable scrambled(std::uint32_t m_levels, prng::GeneratorSpec gen) {
        MappingTable m;
        m.kind = Kind::Scrambled;
        m.table = regular(m_levels).table;     // slot-0 shape; per-slot tables come from the stream
        m.scramble = std::move(gen);
        return m;
    }

    std::size_t width() const { return table.size(); }

    void validate(std::uint32_t m_levels) const {
        if (table.size() != m_levels) throw config_error("mapping: table width != M");
        if (kind != Kind::Scrambled && !is_permutation_table(table))
            throw config_error("mapping: table is not a permutation");
        if (kind == Kind::Scrambled) scramble.validate();
    }
};

/// Per-slot view of the mapping. Non-scrambled kinds share one permutation;
/// the scrambled kind redraws a Fisher-Yates permutation per slot from 64
/// generator bits, deterministically.
class MappingSequence {
public:
    MappingSequence(const MappingTable& m, std::size_t horizon) : fixed_(m.table) {
        if (m.kind == MappingTable::Kind::Scrambled) {
            prng::BitStream s(m.scramble);
            per_slot_.reserve(horizon);
            for (std::size_t t = 0; t < horizon; ++t) {
                std::uint64_t draw = 0;
                for (int i = 0; i < 64; ++i) draw = (draw << 1) | s.next();
                per_slot_.push_back(shuffled(fixed_.size(), draw));
            }
        }
    }

    const std::vector<std::uint32_t>& at(std::size_t t) const {
        if (per_slot_.empty()) return fixed_;
        return per_slot_.at(t);
    }

    bool scrambled() const { return !per_slot_.empty(); }

private:
    static std::vector<std::uint32_t> shuffled(std::size_t n, std::uint64_t seed) {
        std::vector<std::uint32_t> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<std::uint32_t>(i);
        RandomStream rs(seed);
        for (std::size_t i = n - 1; i > 0; --i) {
            std::size_t j = rs.next_below(i + 1);
            std::swap(p[i], p[j]);
        }
        return p;
    }

    std::vector<std::uint32_t> fixed_;
    std::vector<std::vector<std::uint32_t>> per_slot_;
};

} // namespace y00lab::core
