#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace y00lab {

/// splitmix64 step. Full-period permutation-based stream; good enough for
/// simulation noise, not a cryptographic generator.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a ^ (b + 0x9E3779B97F4A7C15ull + (a << 6) + (a >> 2));
    return splitmix64(s);
}

/// Counter-addressable random stream. Streams derived from (seed, index) are
/// independent of evaluation order, so parallel slot-wise sampling reproduces
/// the sequential result.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : state_(seed) { (void)splitmix64(state_); }
    RandomStream(std::uint64_t seed, std::uint64_t stream) : RandomStream(mix_seed(seed, stream)) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform in (0, 1]; never returns 0 so log() is safe.
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    /// Standard normal pair via Box-Muller.
    std::complex<double> next_gaussian_pair() {
        double u1 = next_unit();
        double u2 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        return {r * std::cos(a), r * std::sin(a)};
    }

    /// Complex Gaussian: mean mu, per-quadrature standard deviation sigma.
    std::complex<double> next_complex_gaussian(std::complex<double> mu, double sigma) {
        auto g = next_gaussian_pair();
        return mu + sigma * g;
    }

private:
    std::uint64_t state_;
};

} // namespace y00lab
