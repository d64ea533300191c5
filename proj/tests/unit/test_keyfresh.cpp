#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "y00lab/keyfresh.hpp"

using namespace y00lab;
using namespace y00lab::keyfresh;

namespace {

core::Y00Config refresh_config(double alpha0, double eta) {
    core::Y00Config cfg;
    cfg.m_levels = 2;
    cfg.geometry = core::Geometry::PSK;
    cfg.mapping = core::MappingTable::regular(2);
    cfg.alpha0 = alpha0;
    cfg.eta = eta;
    cfg.prng_s = prng::GeneratorSpec::make_lfsr(16, {16, 15, 13, 4}, bits_from_hex("ACE1", 16));
    cfg.prng_dx = prng::GeneratorSpec::make_lfsr(16, {16, 14, 13, 11}, bits_from_hex("B1D0", 16));
    return cfg;
}

Bits random_bits(RandomStream& rs, unsigned width, bool nonzero = false) {
    Bits b(width);
    do {
        for (auto& v : b) v = static_cast<std::uint8_t>(rs.next_u64() & 1);
    } while (nonzero && !any_bit(b));
    return b;
}

} // namespace

TEST_CASE("Toeplitz hashing basics") {
    // zero input hashes to zero by linearity
    RandomStream rs(1);
    HashSpec spec{8, 3, random_bits(rs, 10)};
    CHECK(toeplitz_hash(spec, Bits(8, 0)) == Bits(3, 0));

    // hand matrix: n = 2, tau = 1, seed (1, 0): T = [1 0]
    HashSpec tiny{2, 1, Bits{1, 0}};
    CHECK(toeplitz_hash(tiny, Bits{1, 0}) == Bits{1});
    CHECK(toeplitz_hash(tiny, Bits{0, 1}) == Bits{0});
    CHECK(toeplitz_hash(tiny, Bits{1, 1}) == Bits{1});

    CHECK_THROWS_AS(toeplitz_hash(tiny, Bits{1}), config_error);
    CHECK_THROWS_AS((HashSpec{2, 1, Bits{1}}).validate(), config_error);
}

TEST_CASE("Toeplitz hashing is linear") {
    RandomStream rs(77);
    HashSpec spec{16, 6, random_bits(rs, 21)};
    for (int trial = 0; trial < 1000; ++trial) {
        Bits a = random_bits(rs, 16), b = random_bits(rs, 16);
        Bits lhs = toeplitz_hash(spec, xor_bits(a, b));
        Bits rhs = xor_bits(toeplitz_hash(spec, a), toeplitz_hash(spec, b));
        REQUIRE(lhs == rhs);
    }
}

TEST_CASE("family collides like a 2-universal family") {
    // for fixed distinct inputs, collisions over random seeds happen with
    // probability 2^-tau
    RandomStream rs(31);
    const unsigned n = 12, tau = 4;
    const int draws = 20000;
    for (int pair = 0; pair < 3; ++pair) {
        Bits a = random_bits(rs, n), b;
        do { b = random_bits(rs, n); } while (b == a);
        int collisions = 0;
        for (int d = 0; d < draws; ++d) {
            HashSpec spec{n, tau, random_bits(rs, n + tau - 1)};
            if (toeplitz_hash(spec, a) == toeplitz_hash(spec, b)) ++collisions;
        }
        double rate = static_cast<double>(collisions) / draws;
        double expect = std::exp2(-static_cast<double>(tau));
        double sd = std::sqrt(expect * (1 - expect) / draws);
        CHECK(std::abs(rate - expect) < 4 * sd + 1e-3);
        CHECK(rate <= expect * 1.01 + 4 * sd);
    }
}

TEST_CASE("sacrifice rule: one third of the entropy") {
    auto c = optimal_tau(30.0);
    CHECK(c.tau == 10);
    CHECK(c.epsilon == Catch::Approx(std::exp2(-10.0)).epsilon(1e-12));
    CHECK(c.guess_bound == Catch::Approx(3.0 * std::exp2(-10.0)).epsilon(1e-12));

    // 256- or 512-bit fresh keys need three times that much entropy
    CHECK(optimal_tau(1536.0).tau == 512);
    CHECK(optimal_tau(768.0).tau == 256);

    CHECK_THROWS_AS(optimal_tau(0.0), config_error);
    CHECK_THROWS_AS(optimal_tau(-3.0), config_error);
}

TEST_CASE("integer grid search confirms the optimum") {
    for (double h : {9.0, 10.0, 17.0, 30.0, 31.5, 60.0}) {
        unsigned best_tau = 1;
        double best = 1e300;
        for (unsigned t = 1; t <= static_cast<unsigned>(h); ++t) {
            double b = guess_bound_for_tau(h, t);
            if (b < best) { best = b; best_tau = t; }
        }
        double lo = std::floor(h / 3.0), hi = std::ceil(h / 3.0);
        INFO("h_inf " << h << " grid minimum at " << best_tau);
        CHECK((best_tau == static_cast<unsigned>(lo) || best_tau == static_cast<unsigned>(hi)));
    }
}

TEST_CASE("guessing bound against the threshold") {
    ExtractorParams params;
    params.h_inf = 30.0;
    params.tau = 10;
    params.kappa = 30.0;
    params.epsilon = std::exp2(-10.0);
    params.p_th = 0.5;
    auto rep = guess_probability_bound(params);
    CHECK(rep.bound == Catch::Approx(3.0 * std::exp2(-10.0)).epsilon(1e-12));
    CHECK(rep.well_below_threshold);

    params.tau = 20;
    params.h_inf = params.kappa = 60.0;
    params.epsilon = std::exp2(-20.0);
    rep = guess_probability_bound(params);
    CHECK(rep.bound == Catch::Approx(3.0 * std::exp2(-20.0)).epsilon(1e-12));

    ExtractorParams bad = params;
    bad.epsilon = 0.1;
    CHECK_THROWS_AS(guess_probability_bound(bad), config_error);
}

TEST_CASE("fast histogram agrees with direct hashing") {
    RandomStream rs(13);
    const unsigned n = 8, tau = 3;
    HashSpec spec{n, tau, random_bits(rs, n + tau - 1)};
    auto cols = keyfresh::detail::hash_columns(spec);
    std::vector<double> px(1u << n, 1.0 / (1u << n));
    std::vector<double> hist(1u << tau);
    keyfresh::detail::seed_histogram(spec, px, cols, hist);
    std::vector<double> direct(1u << tau, 0.0);
    for (std::uint32_t x = 0; x < (1u << n); ++x) {
        // pack the integer x into MSB-first bits
        Bits in = bits_of_word(x, n);
        Bits out = toeplitz_hash(spec, in);
        std::uint32_t word = 0;
        for (unsigned i = 0; i < tau; ++i) word |= static_cast<std::uint32_t>(out[i]) << i;
        direct[word] += px[x];
    }
    for (std::size_t v = 0; v < hist.size(); ++v)
        CHECK(hist[v] == Catch::Approx(direct[v]).margin(1e-12));
}

TEST_CASE("extracted keys sit close to uniform when entropy suffices") {
    // uniform 12-bit source, tau = 4 = n/3: exact distance <= 2 eps
    ConditionedSource src;
    src.cond_probs = {1.0};
    src.input_dists = {std::vector<double>(1u << 12, 1.0 / (1u << 12))};
    auto rep = sd_from_uniform(12, 4, src, /*exact=*/true);
    CHECK(rep.certified);
    CHECK(rep.distance <= 2.0 * std::exp2((4.0 - 12.0) / 2.0));
    CHECK(rep.distance == Catch::Approx(0.5 * (rep.above_sum + rep.below_sum)).margin(1e-12));
    CHECK(rep.above_sum <= 2.0 * rep.epsilon + 1e-12);
    CHECK(rep.below_sum >= -1e-15);
    CHECK(rep.best_guess <= 2.0 * rep.epsilon + std::exp2(-4.0) + 1e-12);
}

TEST_CASE("a known input leaves the output far from uniform") {
    // point mass: no entropy, distance (1 - 2^-tau)
    const unsigned n = 10, tau = 3;
    ConditionedSource src;
    src.cond_probs = {1.0};
    std::vector<double> point(1u << n, 0.0);
    point[137] = 1.0;
    src.input_dists = {point};
    auto rep = sd_from_uniform(n, tau, src, true);
    CHECK(rep.distance == Catch::Approx(1.0 - std::exp2(-static_cast<double>(tau))).margin(1e-12));
    CHECK(rep.distance >= 0.5 * (1.0 - std::exp2(-static_cast<double>(tau))));
    CHECK(rep.best_guess == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("empty output is trivially uniform") {
    ConditionedSource src;
    src.cond_probs = {1.0};
    src.input_dists = {std::vector<double>(1u << 6, 1.0 / 64.0)};
    auto rep = sd_from_uniform(6, 0, src, true);
    CHECK(rep.distance == 0.0);
}

TEST_CASE("infeasible exact enumerations are refused, sampling is flagged") {
    ConditionedSource src;
    src.cond_probs = {1.0};
    src.input_dists = {std::vector<double>(1u << 18, 1.0 / (1u << 18))};
    CHECK_THROWS_AS(sd_from_uniform(18, 6, src, true), infeasible_error);
    auto mc = sd_from_uniform(18, 6, src, false, 16, 7);
    CHECK_FALSE(mc.certified);
    CHECK(mc.seeds_used == 16);
}

TEST_CASE("skewed sources: measured guess probability respects the bound") {
    // source with known min-entropy: two spikes over a 12-bit alphabet
    const unsigned n = 12;
    ConditionedSource src;
    src.cond_probs = {0.5, 0.5};
    for (int c = 0; c < 2; ++c) {
        std::vector<double> d(1u << n, 0.5 / ((1u << n) - 2));
        d[100 + c] = 0.25;
        d[2000 + c] = 0.25;
        double tot = 0.0;
        for (double v : d) tot += v;
        for (auto& v : d) v /= tot;
        src.input_dists.push_back(d);
    }
    double h = src.min_entropy();
    REQUIRE(h == Catch::Approx(-std::log2(0.25)).margin(1e-9));
    unsigned tau = optimal_tau(h).tau;  // floor(2/3) -> 0? no: h = 2 bits -> 0
    // h is tiny here; use tau = 1 and verify the inequality directly
    tau = std::max(tau, 1u);
    auto rep = sd_from_uniform(n, tau, src, true);
    double eps = std::exp2(0.5 * (static_cast<double>(tau) - h));
    CHECK(rep.distance <= 2.0 * eps + 1e-12);
    CHECK(rep.best_guess <= 2.0 * eps + std::exp2(-static_cast<double>(tau)) + 1e-12);
}

TEST_CASE("per-slot adversary estimates behave at the extremes") {
    // no tap: a fair coin per bit
    auto coin = eve_bit_guess_success(refresh_config(4.0, 0.0), 0);
    CHECK(coin == Catch::Approx(0.5).margin(1e-9));
    // full tap, strong signal: near certainty
    auto sure = eve_bit_guess_success(refresh_config(12.0, 1.0), 0);
    CHECK(sure > 1.0 - 1e-9);
}

TEST_CASE("payload min-entropy floors") {
    // strong tap: nearly everything leaks, near-zero bits per slot
    auto strong = payload_min_entropy(refresh_config(12.0, 1.0), 100);
    CHECK(strong.bits_per_slot < 0.01);
    // faint tap: close to one full bit per slot
    auto weak = payload_min_entropy(refresh_config(12.0, 0.01), 100);
    CHECK(weak.bits_per_slot > 0.8);
    CHECK(weak.total == Catch::Approx(100.0 * weak.bits_per_slot).epsilon(1e-12));
    // entropy grows as the tap weakens
    auto mid = payload_min_entropy(refresh_config(12.0, 0.05), 100);
    CHECK(mid.bits_per_slot > strong.bits_per_slot);
    CHECK(weak.bits_per_slot > mid.bits_per_slot);
}

TEST_CASE("refresh round trip: clean channel") {
    auto cfg = refresh_config(8.0, 0.2);
    Bits k = bits_from_hex("ACE1", 16), dk = bits_from_hex("B1D0", 16);
    RefreshOptions opts;
    opts.rng_seed = 404;
    auto out = refresh_roundtrip(cfg, k, dk, 96, 32, opts);
    REQUIRE(out.success);
    CHECK(out.alice_key == out.bob_key);
    CHECK(out.alice_key.size() == 32);
    CHECK(out.eve_tap.size() == out.slots_used);
}

TEST_CASE("refresh round trip: residual-noise success rate matches the oracle") {
    // receiver crossover ~1e-3, repetition 5, ~1e3 payload bits
    auto cfg = refresh_config(3.8628, 0.6);
    double crossover = oracles::binary_crossover(2.0 * cfg.alpha0 * cfg.bob_scale(),
                                                 cfg.noise.sigma());
    REQUIRE(crossover > 5e-4);
    REQUIRE(crossover < 2e-3);
    const unsigned n = 460, tau = 12;
    double payload_bits = (n + tau - 1) + n + 32;
    double p_bit_fail = oracles::binomial_tail(5, crossover, 3);
    double p_run_fail = 1.0 - std::pow(1.0 - p_bit_fail, payload_bits);
    REQUIRE(p_run_fail < 1e-3);  // the oracle says failures are rare

    Bits k = bits_from_hex("ACE1", 16), dk = bits_from_hex("B1D0", 16);
    int good = 0;
    for (int run = 0; run < 100; ++run) {
        RefreshOptions opts;
        opts.rng_seed = 9000 + run;
        auto out = refresh_roundtrip(cfg, k, dk, n, tau, opts);
        if (out.success && out.alice_key == out.bob_key) ++good;
    }
    CHECK(good >= 99);
}

TEST_CASE("refresh round trip: tampering aborts, keys unchanged") {
    auto cfg = refresh_config(8.0, 0.2);
    Bits k = bits_from_hex("ACE1", 16), dk = bits_from_hex("B1D0", 16);
    RefreshOptions opts;
    opts.rng_seed = 11;
    opts.tamper_payload_bit = 57;
    auto out = refresh_roundtrip(cfg, k, dk, 96, 32, opts);
    CHECK_FALSE(out.success);
    CHECK(out.alice_key.empty());
    CHECK(out.bob_key.empty());
    CHECK(out.failure_reason.find("integrity") != std::string::npos);
}

TEST_CASE("refresh refuses after the breach window") {
    auto cfg = refresh_config(8.0, 0.2);
    Bits k = bits_from_hex("ACE1", 16), dk = bits_from_hex("B1D0", 16);
    RefreshOptions opts;
    opts.periods_consumed = 10.0;
    opts.n_at_threshold = 5.0;
    auto out = refresh_roundtrip(cfg, k, dk, 96, 32, opts);
    CHECK_FALSE(out.success);
    CHECK(out.failure_reason.find("threshold") != std::string::npos);
}
