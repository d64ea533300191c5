#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>

#include "y00lab/bits.hpp"
#include "y00lab/errors.hpp"
#include "y00lab/mapping.hpp"
#include "y00lab/prng.hpp"
#include "y00lab/toml.hpp"

namespace y00lab::core {

/// Heterodyne outcome noise. Per-quadrature variance is (1 + xi)/2 for the
/// signal mode plus 1/2 for the heterodyne vacuum unit when the heterodyne
/// convention is on: sigma^2 = (1 + xi)/2 + 1/2.
struct NoiseModel {
    double xi = 0.0;
    bool heterodyne = true;

    void validate() const {
        if (xi < 0.0) throw config_error("noise: xi must be >= 0");
    }

    double variance_per_quadrature() const {
        return 0.5 * (1.0 + xi) + (heterodyne ? 0.5 : 0.0);
    }
    double sigma() const { return std::sqrt(variance_per_quadrature()); }
};

enum class Geometry { PSK, ISK };

enum class DsrMode { None, Keyed, TrueRandom };

struct DsrSpec {
    DsrMode mode = DsrMode::None;
    prng::GeneratorSpec gen;   // Keyed mode only
};

/// Complete system design. One config drives modulation, the tap channel,
/// breach analytics, the attack harness, and key refreshment.
struct Y00Config {
    std::uint32_t m_levels = 16;        // M; constellation has 2M points
    Geometry geometry = Geometry::PSK;
    MappingTable mapping = MappingTable::regular(16);
    double alpha0 = 10.0;               // base amplitude, shot-noise units
    double eta = 1.0;                   // Eve's amplitude tap ratio
    NoiseModel noise;
    DsrSpec dsr;
    prng::GeneratorSpec prng_s;
    prng::GeneratorSpec prng_dx;

    unsigned word_width() const { return log2_exact(m_levels); }
    std::uint32_t points() const { return 2 * m_levels; }

    void validate() const {
        if (!is_power_of_two(m_levels) || m_levels < 2)
            throw config_error("y00: M must be a power of two >= 2");
        if (alpha0 <= 0.0) throw config_error("y00: alpha0 must be > 0");
        if (eta < 0.0 || eta > 1.0) throw config_error("y00: eta must be in [0, 1]");
        noise.validate();
        mapping.validate(m_levels);
        prng_s.validate();
        prng_dx.validate();
        if (dsr.mode == DsrMode::Keyed) dsr.gen.validate();
    }

    /// Transmitted amplitude for symbol index m in [0, 2M).
    std::complex<double> amplitude(std::uint32_t m) const {
        if (m >= points()) throw config_error("amplitude: symbol index out of range");
        if (geometry == Geometry::PSK) {
            double phase = M_PI * static_cast<double>(m) / static_cast<double>(m_levels);
            return std::polar(alpha0, phase);
        }
        return {alpha0 * static_cast<double>(m + 1) / static_cast<double>(points()), 0.0};
    }

    /// Eve's tapped amplitude.
    std::complex<double> eve_amplitude(std::uint32_t m) const { return eta * amplitude(m); }

    /// Bob keeps the complement of the tapped energy.
    double bob_scale() const { return std::sqrt(std::max(0.0, 1.0 - eta * eta)); }
    std::complex<double> bob_amplitude(std::uint32_t m) const { return bob_scale() * amplitude(m); }
};

namespace detail {

inline prng::GeneratorSpec parse_generator(const toml::Table& t, const std::string& prefix) {
    std::string kind = t.get_string_or(prefix + ".kind", "lfsr");
    if (kind == "lfsr") {
        auto degree = static_cast<unsigned>(t.get_int(prefix + ".degree"));
        std::set<unsigned> taps;
        for (auto v : t.get_int_array(prefix + ".taps")) taps.insert(static_cast<unsigned>(v));
        Bits seed = bits_from_hex(t.get_string(prefix + ".seed-hex"), degree);
        return prng::GeneratorSpec::make_lfsr(degree, std::move(taps), std::move(seed));
    }
    if (kind == "counter") {
        Bits key = bits_from_hex(t.get_string(prefix + ".key-hex"), 64);
        auto rounds = static_cast<unsigned>(t.get_int_or(prefix + ".rounds", 4));
        auto width = static_cast<unsigned>(t.get_int_or(prefix + ".width", 32));
        return prng::GeneratorSpec::make_counter(std::move(key), rounds, width);
    }
    throw config_error("config: unknown generator kind '" + kind + "'");
}

} // namespace detail

inline Y00Config config_from_table(const toml::Table& t) {
    Y00Config cfg;
    cfg.m_levels = static_cast<std::uint32_t>(t.get_int("y00.M"));
    std::string geom = t.get_string_or("y00.geometry", "psk");
    if (geom == "psk") cfg.geometry = Geometry::PSK;
    else if (geom == "isk") cfg.geometry = Geometry::ISK;
    else throw config_error("config: y00.geometry must be 'psk' or 'isk'");
    cfg.alpha0 = t.get_double("y00.alpha0");
    cfg.eta = t.get_double("y00.eta");

    cfg.noise.xi = t.get_double_or("noise.xi", 0.0);
    cfg.noise.heterodyne = t.get_bool_or("noise.heterodyne", true);

    std::string mkind = t.get_string_or("mapping.kind", "regular");
    if (mkind == "regular") cfg.mapping = MappingTable::regular(cfg.m_levels);
    else if (mkind == "irregular") cfg.mapping = MappingTable::irregular(cfg.m_levels);
    else if (mkind == "table") {
        std::vector<std::uint32_t> tab;
        for (auto v : t.get_int_array("mapping.table")) tab.push_back(static_cast<std::uint32_t>(v));
        cfg.mapping = MappingTable::explicit_table(std::move(tab));
    } else if (mkind == "scrambled") {
        cfg.mapping = MappingTable::scrambled(cfg.m_levels, detail::parse_generator(t, "mapping.scramble"));
    } else {
        throw config_error("config: unknown mapping.kind '" + mkind + "'");
    }

    std::string dmode = t.get_string_or("dsr.mode", "none");
    if (dmode == "none") cfg.dsr.mode = DsrMode::None;
    else if (dmode == "keyed") {
        cfg.dsr.mode = DsrMode::Keyed;
        cfg.dsr.gen = detail::parse_generator(t, "dsr.gen");
    } else if (dmode == "truerandom") cfg.dsr.mode = DsrMode::TrueRandom;
    else throw config_error("config: unknown dsr.mode '" + dmode + "'");

    cfg.prng_s = detail::parse_generator(t, "prng.s");
    cfg.prng_dx = detail::parse_generator(t, "prng.dx");

    cfg.validate();
    return cfg;
}

inline Y00Config load_config(const std::string& path) {
    return config_from_table(toml::parse_file(path));
}

} // namespace y00lab::core
