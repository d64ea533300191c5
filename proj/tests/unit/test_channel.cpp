#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "y00lab/channel.hpp"

using namespace y00lab;
using namespace y00lab::core;
using namespace y00lab::channel;

namespace {

Y00Config psk_config(std::uint32_t M, double alpha0, double eta, double xi = 0.0) {
    Y00Config cfg;
    cfg.m_levels = M;
    cfg.geometry = Geometry::PSK;
    cfg.mapping = MappingTable::regular(M);
    cfg.alpha0 = alpha0;
    cfg.eta = eta;
    cfg.noise.xi = xi;
    cfg.prng_s = prng::GeneratorSpec::make_lfsr(4, {4, 1}, Bits{0, 0, 0, 1});
    cfg.prng_dx = prng::GeneratorSpec::make_lfsr(3, {3, 1}, Bits{0, 0, 1});
    return cfg;
}

} // namespace

TEST_CASE("quadrature reproduces closed forms") {
    CHECK(integrate([](double x) { return x * x; }, 0.0, 1.0) == Catch::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(integrate([](double x) { return std::sin(x); }, 0.0, M_PI) ==
          Catch::Approx(2.0).epsilon(1e-12));
    // angle density normalizes to 1 for several displacements
    for (double a : {0.0, 0.7, 2.3, 8.0}) {
        double total = integrate(
            [a](double th) { return y00lab::channel::detail::angle_density(th, a); }, -M_PI, M_PI,
            1e-13);
        CHECK(total == Catch::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("tapped outcomes are seeded and order independent") {
    auto cfg = psk_config(4, 3.0, 0.8);
    auto rk = prng::expand_running_key(cfg.prng_s.lfsr.seed, cfg.prng_dx.lfsr.seed, cfg.prng_s,
                                       cfg.prng_dx, 2, 32);
    Bits x(32, 1);
    auto tr = modulate(rk, x, cfg);
    auto a = tap_and_measure(tr, cfg, 9001);
    auto b = tap_and_measure(tr, cfg, 9001);
    CHECK(a == b);
    auto c = tap_and_measure(tr, cfg, 9002);
    CHECK(a != c);
}

TEST_CASE("zero tap carries no signal") {
    auto cfg = psk_config(4, 3.0, 0.0);
    auto rk = prng::expand_running_key(cfg.prng_s.lfsr.seed, cfg.prng_dx.lfsr.seed, cfg.prng_s,
                                       cfg.prng_dx, 2, 4096);
    Bits x(4096, 0);
    auto tr = modulate(rk, x, cfg);
    auto outs = tap_and_measure(tr, cfg, 5);
    // sample mean near the origin and no dependence on the symbol index:
    // correlate Re(outcome) with the transmitted phase
    double mean_re = 0.0, corr = 0.0;
    for (std::size_t t = 0; t < outs.size(); ++t) {
        mean_re += outs[t].real();
        corr += outs[t].real() * std::cos(std::arg(tr.slots[t].amp));
    }
    mean_re /= static_cast<double>(outs.size());
    corr /= static_cast<double>(outs.size());
    CHECK(std::abs(mean_re) < 0.08);
    CHECK(std::abs(corr) < 0.08);
}

TEST_CASE("vacuum outcomes are standard complex Gaussian") {
    auto cfg = psk_config(2, 1e-12, 1.0);
    auto rk = prng::expand_running_key(cfg.prng_s.lfsr.seed, cfg.prng_dx.lfsr.seed, cfg.prng_s,
                                       cfg.prng_dx, 1, 1 << 15);
    Bits x(1 << 15, 0);
    auto tr = modulate(rk, x, cfg);
    auto outs = tap_and_measure(tr, cfg, 11);
    double v_re = 0.0, v_im = 0.0;
    for (auto& y : outs) {
        v_re += y.real() * y.real();
        v_im += y.imag() * y.imag();
    }
    v_re /= static_cast<double>(outs.size());
    v_im /= static_cast<double>(outs.size());
    CHECK(v_re == Catch::Approx(1.0).margin(0.03));
    CHECK(v_im == Catch::Approx(1.0).margin(0.03));
}

TEST_CASE("decision cells tile the plane") {
    auto cfg = psk_config(8, 2.0, 1.0);
    auto regions = DecisionRegionSet::for_eve(cfg);
    // cell centers map to themselves
    for (std::uint32_t m = 0; m < 16; ++m)
        CHECK(decide_symbol(cfg.eve_amplitude(m), regions) == m);
    // rotating by whole sectors shifts the index
    for (std::uint32_t k = 1; k < 4; ++k) {
        auto y = cfg.eve_amplitude(0) * std::polar(1.0, k * M_PI / 8.0);
        CHECK(decide_symbol(y, regions) == k);
    }
    // uniform angle -> uniform cells (measure check under a sampled law)
    RandomStream rs(3);
    std::vector<std::uint64_t> hist(16, 0);
    const std::size_t n = 1 << 17;
    for (std::size_t i = 0; i < n; ++i) {
        double th = 2.0 * M_PI * rs.next_double();
        ++hist[decide_symbol(std::polar(1.0, th), regions)];
    }
    double chi2 = 0.0;
    for (auto h : hist) {
        double e = static_cast<double>(n) / 16.0;
        chi2 += (h - e) * (h - e) / e;
    }
    CHECK(chi2 < 37.7);  // 99.9% quantile, 15 dof
}

TEST_CASE("ISK thresholds are the ladder midpoints") {
    auto cfg = psk_config(4, 4.0, 0.5);
    cfg.geometry = Geometry::ISK;
    auto regions = DecisionRegionSet::for_eve(cfg);
    REQUIRE(regions.isk_thresholds.size() == 7);
    for (std::uint32_t m = 0; m < 8; ++m)
        CHECK(decide_symbol(cfg.eve_amplitude(m), regions) == m);
    // boundary resolves to the lower index
    CHECK(decide_symbol({regions.isk_thresholds[2], 0.0}, regions) == 2);
    cfg.eta = 0.0;
    CHECK_THROWS_AS(DecisionRegionSet::for_eve(cfg), config_error);
}

TEST_CASE("offset law: noise extremes") {
    // strong signal: point mass at zero offset
    auto strong = symbol_error_dist(0, psk_config(2, 40.0, 1.0));
    CHECK(strong[0] == Catch::Approx(1.0).margin(1e-12));
    // vanishing signal: uniform over 2M offsets
    auto weak = symbol_error_dist(0, psk_config(2, 1e-9, 1.0));
    for (double p : weak) CHECK(p == Catch::Approx(0.25).margin(1e-9));
}

TEST_CASE("PSK offset law matches Monte Carlo at 4 sigma") {
    auto cfg = psk_config(4, 1.0, 1.0);
    auto p = symbol_error_dist(0, cfg);
    REQUIRE(p.size() == 8);
    auto regions = DecisionRegionSet::for_eve(cfg);
    const std::size_t n = 10'000'000;
    RandomStream rs(20240);
    std::vector<std::uint64_t> hist(8, 0);
    auto mu = cfg.eve_amplitude(0);
    const double sigma = cfg.noise.sigma();
    for (std::size_t i = 0; i < n; ++i)
        ++hist[decide_symbol(rs.next_complex_gaussian(mu, sigma), regions)];
    for (std::uint32_t d = 0; d < 8; ++d) {
        double obs = static_cast<double>(hist[d]) / static_cast<double>(n);
        double sd = std::sqrt(p[d] * (1.0 - p[d]) / static_cast<double>(n));
        INFO("offset " << d);
        CHECK(std::abs(obs - p[d]) <= 4.0 * sd + 1e-9);
    }
}

TEST_CASE("PSK offset law is shift invariant, ISK is not") {
    auto cfg = psk_config(4, 1.3, 0.9);
    auto p0 = symbol_error_dist(0, cfg);
    auto p3 = symbol_error_dist(3, cfg);
    for (std::size_t i = 0; i < p0.size(); ++i) CHECK(p0[i] == Catch::Approx(p3[i]).margin(1e-10));

    cfg.geometry = Geometry::ISK;
    cfg.alpha0 = 20.0;
    // edge of the ladder keeps more mass than an interior rung
    auto q0 = symbol_error_dist(0, cfg);
    auto q3 = symbol_error_dist(3, cfg);
    CHECK(std::abs(q0[0] - q3[0]) > 1e-3);
}

TEST_CASE("binary crossover agrees with the tail oracle") {
    // two antipodal points, decided by sign: crossover = erfc tail
    auto cfg = psk_config(2, 2.0, 1.0);
    const std::size_t n = 2'000'000;
    RandomStream rs(7);
    auto mu = cfg.eve_amplitude(0);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (rs.next_complex_gaussian(mu, cfg.noise.sigma()).real() < 0.0) ++wrong;
    double mc = static_cast<double>(wrong) / static_cast<double>(n);
    double oracle = oracles::binary_crossover(2.0 * cfg.eta * cfg.alpha0, cfg.noise.sigma());
    double sd = std::sqrt(oracle * (1.0 - oracle) / static_cast<double>(n));
    CHECK(std::abs(mc - oracle) < 3.0 * sd + 1e-9);
    // the angular density integrated over the wrong half-plane gives the
    // same tail analytically
    double a = cfg.eta * cfg.alpha0 / cfg.noise.sigma();
    double wrong_half = integrate(
        [a](double th) { return y00lab::channel::detail::angle_density(th, a); }, M_PI / 2,
        3 * M_PI / 2, 1e-13);
    CHECK(wrong_half == Catch::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("randomization averages the slot law over the band") {
    auto cfg = psk_config(4, 1.2, 1.0);
    cfg.dsr.mode = DsrMode::TrueRandom;
    auto p = slot_offset_dist(cfg, 2);
    REQUIRE(p.size() == 8);
    double sum = std::accumulate(p.begin(), p.end(), 0.0);
    CHECK(sum == Catch::Approx(1.0).margin(1e-9));
    // base-band marginal strictly closer to uniform than without
    cfg.dsr.mode = DsrMode::None;
    auto q = symbol_error_dist(2, cfg);
    auto tv_base = [&](const std::vector<double>& d) {
        double tv = 0.0;
        for (std::uint32_t b = 0; b < 4; ++b) tv += std::abs(d[b] + d[b + 4] - 0.25);
        return 0.5 * tv;
    };
    CHECK(tv_base(p) < tv_base(q) - 1e-6);
    CHECK(tv_base(p) < 1e-9);  // exactly flat within quadrature accuracy
}

TEST_CASE("pattern law: dense product and minimum") {
    // two slots, uniform over 4 -> min 1/16, 4 pattern bits
    std::vector<std::vector<double>> slots(2, std::vector<double>(4, 0.25));
    auto d = ErrorPatternDist::from_slots(std::move(slots), 2, 2, false);
    CHECK(d.pattern_bits() == 4);
    CHECK(d.min_prob == Catch::Approx(1.0 / 16).epsilon(1e-12));
    auto dense = d.dense();
    REQUIRE(dense.size() == 16);
    for (double v : dense) CHECK(v == Catch::Approx(1.0 / 16).epsilon(1e-12));

    // T=1, M=2, uniform: min = 1/4 = (2M)^-1
    std::vector<std::vector<double>> one(1, std::vector<double>(4, 0.25));
    auto d1 = ErrorPatternDist::from_slots(std::move(one), 2, 1, false);
    CHECK(d1.min_prob == Catch::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("pattern law from a config over one period") {
    auto cfg = psk_config(2, 1.0, 1.0);
    auto rk = prng::expand_running_key(cfg.prng_s.lfsr.seed, cfg.prng_dx.lfsr.seed, cfg.prng_s,
                                       cfg.prng_dx, 1, 105);
    Bits x(105, 0);
    auto d = pattern_dist(cfg, rk, x);
    REQUIRE(d.period == 105);
    CHECK(d.stationary);
    // dense enumeration oracle at T=2: product of the slot minima
    auto slot = symbol_error_dist(0, cfg);
    double mn = *std::min_element(slot.begin(), slot.end());
    CHECK(std::exp2(d.log2_min_prob / 105.0) == Catch::Approx(mn).epsilon(1e-9));
    // pattern bits below (2M)^-T always
    CHECK(d.log2_min_prob <= -static_cast<double>(d.pattern_bits()) + 1e-9);
}

TEST_CASE("pattern law minimum equals the per-slot product (dense oracle)") {
    auto cfg = psk_config(4, 1.1, 0.9);
    std::vector<std::vector<double>> slots;
    slots.push_back(symbol_error_dist(0, cfg));
    slots.push_back(symbol_error_dist(0, cfg));
    auto d = ErrorPatternDist::from_slots(slots, 3, 2, false);
    auto dense = d.dense();
    double mn = *std::min_element(dense.begin(), dense.end());
    double per_slot = *std::min_element(slots[0].begin(), slots[0].end());
    CHECK(mn == Catch::Approx(per_slot * per_slot).epsilon(1e-9));
    CHECK(d.min_prob == Catch::Approx(mn).epsilon(1e-9));
    // completeness: dense table sums to 1
    double total = std::accumulate(dense.begin(), dense.end(), 0.0);
    CHECK(total == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("true-random randomization yields the flat pattern law") {
    auto cfg = psk_config(4, 6.0, 1.0);
    cfg.dsr.mode = DsrMode::TrueRandom;
    auto rk = prng::expand_running_key(cfg.prng_s.lfsr.seed, cfg.prng_dx.lfsr.seed, cfg.prng_s,
                                       cfg.prng_dx, 2, 105);
    Bits x(105, 0);
    auto d = pattern_dist(cfg, rk, x);
    CHECK(d.log2_min_prob == Catch::Approx(-static_cast<double>(d.pattern_bits())).margin(1e-9));
}

TEST_CASE("unknown period refuses analytics") {
    auto cfg = psk_config(2, 1.0, 1.0);
    auto rk = prng::expand_running_key(cfg.prng_s.lfsr.seed, cfg.prng_dx.lfsr.seed, cfg.prng_s,
                                       cfg.prng_dx, 1, 8, /*period_cap=*/3);
    Bits x(8, 0);
    CHECK_THROWS_AS(pattern_dist(cfg, rk, x), infeasible_error);
}
