#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "y00lab/channel.hpp"
#include "y00lab/errors.hpp"

namespace y00lab::breach {

/// Wide-mantissa float for probability arithmetic. Curve parameters at
/// cryptographic key sizes involve 2^-512-scale priors and exponents, which
/// need both the mantissa and the exponent headroom.
using BigFloat = boost::multiprecision::cpp_bin_float_50;

inline BigFloat exp2_big(const BigFloat& x) {
    return boost::multiprecision::exp(x * boost::math::constants::ln_two<BigFloat>());
}

inline BigFloat log2_big(const BigFloat& x) {
    return boost::multiprecision::log(x) / boost::math::constants::ln_two<BigFloat>();
}

/// log2 of a uniform prior over `count` independent nonzero seeds of the
/// given bit width: Pr(r) = (2^bits - 1)^(-count).
inline double log2_prior_nonzero_seeds(unsigned bits, unsigned count) {
    BigFloat v = -static_cast<int>(count) * log2_big(exp2_big(BigFloat(bits)) - 1);
    return static_cast<double>(v);
}

enum class ItsClass { NonITS, ITS, Ideal };

inline const char* its_class_name(ItsClass c) {
    switch (c) {
        case ItsClass::NonITS: return "non-ITS";
        case ItsClass::ITS: return "ITS";
        default: return "ideal";
    }
}

struct BreachParams {
    double log2_prior = 0.0;      // log2 Pr(r), <= 0
    double inv_n_breach = 0.0;    // 1/N_Breach, >= 0 (+inf for an instant breach)
    double p_th = 0.5;            // security threshold, Pr(r) < p_th < 1

    double prior() const { return std::exp2(log2_prior); }
};

struct NBreachResult {
    double inv_n_breach = 0.0;
    double n_breach = std::numeric_limits<double>::infinity();
};

/// 1/N_Breach = -log2[(2M)^T_LCM * min_e Pr(e|r,x)], evaluated in the log
/// domain. A zero minimum pattern probability means an instant breach:
/// 1/N_Breach = +inf and N_Breach = 0.
inline NBreachResult n_breach(const channel::ErrorPatternDist& dist) {
    NBreachResult r;
    const double log_arg = static_cast<double>(dist.pattern_bits()) + dist.log2_min_prob;
    if (std::isinf(dist.log2_min_prob)) {
        r.inv_n_breach = std::numeric_limits<double>::infinity();
        r.n_breach = 0.0;
        return r;
    }
    r.inv_n_breach = std::max(0.0, -log_arg);
    r.n_breach = r.inv_n_breach == 0.0 ? std::numeric_limits<double>::infinity()
                                       : 1.0 / r.inv_n_breach;
    return r;
}

inline ItsClass classify_its(double inv_n_breach, double ideal_tol = 1e-12) {
    if (inv_n_breach < 0.0) throw config_error("classify_its: 1/N_Breach must be >= 0");
    if (inv_n_breach <= ideal_tol) return ItsClass::Ideal;
    if (inv_n_breach <= 1.0) return ItsClass::ITS;
    return ItsClass::NonITS;
}

/// Success-probability upper bound after N periods:
///   1 - (1 - Pr(r)) * 2^(-N / N_Breach),
/// evaluated as p*q + (1-q) in wide arithmetic so priors down to 2^-512
/// survive to full relative accuracy at N = 0.
inline double success_upper_bound(const BreachParams& params, double n_periods) {
    if (n_periods < 0.0) throw config_error("success_upper_bound: N must be >= 0");
    if (std::isinf(params.inv_n_breach)) return n_periods == 0.0 ? params.prior() : 1.0;
    BigFloat p = exp2_big(BigFloat(params.log2_prior));
    BigFloat q = exp2_big(-BigFloat(n_periods) * BigFloat(params.inv_n_breach));
    BigFloat bound = p * q + (1 - q);
    return static_cast<double>(bound);
}

/// log2 of the bound's distance to one:
///   log2(1 - bound) = log2(1 - Pr(r)) - N / N_Breach.
/// Near-one curves collapse in double precision; this is the form that keeps
/// them strictly ordered at any N.
inline double success_bound_log2_gap(const BreachParams& params, double n_periods) {
    if (n_periods < 0.0) throw config_error("success_bound_log2_gap: N must be >= 0");
    if (std::isinf(params.inv_n_breach)) return -std::numeric_limits<double>::infinity();
    BigFloat one_minus_p = 1 - exp2_big(BigFloat(params.log2_prior));
    BigFloat gap = log2_big(one_minus_p) - BigFloat(n_periods) * BigFloat(params.inv_n_breach);
    return static_cast<double>(gap);
}

/// Periods until the bound reaches the threshold:
///   N = N_Breach * log2[(1 - Pr(r)) / (1 - P_Th)].
inline double time_to_threshold(const BreachParams& params) {
    if (params.p_th <= params.prior() || params.p_th >= 1.0)
        throw config_error("time_to_threshold: need Pr(r) < P_Th < 1");
    if (params.inv_n_breach <= 0.0) return std::numeric_limits<double>::infinity();
    if (std::isinf(params.inv_n_breach)) return 0.0;
    BigFloat one_minus_p = 1 - exp2_big(BigFloat(params.log2_prior));
    BigFloat n = log2_big(one_minus_p / (1 - BigFloat(params.p_th))) / BigFloat(params.inv_n_breach);
    return static_cast<double>(n);
}

struct CurvePoint {
    double n_periods;
    double bound;
    double log2_gap;  // log2(1 - bound)
};

inline std::vector<CurvePoint> breach_curve(const BreachParams& params,
                                            const std::vector<double>& n_grid) {
    std::vector<CurvePoint> out;
    out.reserve(n_grid.size());
    for (double n : n_grid)
        out.push_back({n, success_upper_bound(params, n), success_bound_log2_gap(params, n)});
    return out;
}

// ---------------------------------------------------------------------------
// exact small-scale success probability

/// Hypothesis family for the exact enumeration: one pattern-probability
/// table per candidate key.
struct HypothesisSet {
    std::vector<std::vector<double>> pattern_probs;  // [key][pattern]
    std::vector<double> priors;

    std::size_t num_keys() const { return pattern_probs.size(); }

    void validate() const {
        if (pattern_probs.empty() || pattern_probs.size() != priors.size())
            throw config_error("hypothesis set: shape mismatch");
        double s = 0.0;
        for (double p : priors) s += p;
        if (std::abs(s - 1.0) > 1e-9)
            throw config_error("hypothesis set: priors do not sum to 1");
    }
};

using OmegaPredicate = std::function<bool(const std::vector<std::uint32_t>& counts)>;

inline OmegaPredicate omega_all() {
    return [](const std::vector<std::uint32_t>&) { return true; };
}

/// All observations landed on one designated pattern.
inline OmegaPredicate omega_single_pattern(std::uint32_t pattern, unsigned n_periods) {
    return [pattern, n_periods](const std::vector<std::uint32_t>& counts) {
        return counts[pattern] == n_periods;
    };
}

/// Maximum-likelihood key decision from pattern counts. Membership requires
/// the true key's likelihood to beat every rival strictly; ties are counted
/// against the attacker.
inline OmegaPredicate omega_ml(const HypothesisSet& hyp, std::size_t true_key) {
    hyp.validate();
    if (true_key >= hyp.num_keys()) throw config_error("omega_ml: bad key index");
    std::vector<std::vector<double>> logp(hyp.num_keys());
    for (std::size_t r = 0; r < hyp.num_keys(); ++r) {
        logp[r].resize(hyp.pattern_probs[r].size());
        for (std::size_t e = 0; e < logp[r].size(); ++e)
            logp[r][e] = hyp.pattern_probs[r][e] > 0.0
                             ? std::log2(hyp.pattern_probs[r][e])
                             : -std::numeric_limits<double>::infinity();
    }
    return [logp, true_key](const std::vector<std::uint32_t>& counts) {
        double lt = 0.0;
        for (std::uint32_t e = 0; e < counts.size(); ++e)
            if (counts[e]) {
                if (std::isinf(logp[true_key][e])) return false;
                lt += counts[e] * logp[true_key][e];
            }
        for (std::size_t r = 0; r < logp.size(); ++r) {
            if (r == true_key) continue;
            double lr = 0.0;
            bool dead = false;
            for (std::uint32_t e = 0; e < counts.size(); ++e)
                if (counts[e]) {
                    if (std::isinf(logp[r][e])) { dead = true; break; }
                    lr += counts[e] * logp[r][e];
                }
            if (!dead && lr >= lt) return false;
        }
        return true;
    };
}

/// Number of count vectors to enumerate: C(N + K - 1, N), with early exit
/// once the cap is exceeded.
inline std::uint64_t enumeration_work(std::uint64_t n_patterns, unsigned n_periods,
                                      std::uint64_t cap) {
    double w = 1.0;
    for (unsigned i = 1; i <= n_periods; ++i) {
        w *= static_cast<double>(n_patterns + i - 1) / static_cast<double>(i);
        if (w > static_cast<double>(cap) * 2.0) return cap + 1;
    }
    return static_cast<std::uint64_t>(w + 0.5);
}

namespace detail {

template <class Number>
struct ExactEnumState {
    const std::vector<Number>* probs;
    const OmegaPredicate* omega;
    unsigned n_periods;
    std::vector<std::uint32_t> counts;
    Number total;
};

/// Recursive sparse enumeration of count vectors. `weight` carries
/// N! / prod(n_e!) * prod Pr(e)^{n_e} for the counts fixed so far.
template <class Number>
void enumerate_counts(ExactEnumState<Number>& st, std::size_t from, unsigned remaining,
                      Number weight) {
    if (remaining == 0) {
        if ((*st.omega)(st.counts)) st.total += weight;
        return;
    }
    if (from + 1 == st.probs->size()) {
        // last bin takes the rest
        Number w = weight;
        for (unsigned i = 0; i < remaining; ++i)
            w = w * (*st.probs)[from] * Number(remaining - i) / Number(i + 1);
        st.counts[from] = remaining;
        if ((*st.omega)(st.counts)) st.total += w;
        st.counts[from] = 0;
        return;
    }
    // n_e = 0 first, then grow; multinomial factor updates incrementally:
    // placing one more of pattern `from` multiplies by p_e * (placed so far
    // overall + 1) / (n_e + 1), starting from the full N!/(...) bookkeeping
    // folded into the recursion by tracking "remaining".
    enumerate_counts(st, from + 1, remaining, weight);
    Number w = weight;
    for (unsigned k = 1; k <= remaining; ++k) {
        w = w * (*st.probs)[from] * Number(remaining - k + 1) / Number(k);
        st.counts[from] = k;
        enumerate_counts(st, from + 1, remaining - k, w);
    }
    st.counts[from] = 0;
}

} // namespace detail

/// Exact multinomial success probability:
///   sum over count vectors in Omega of  N! * prod[n(e)!]^-1 * prod Pr(e)^n(e).
/// Enumeration is refused above the work cap rather than approximated.
template <class Number = BigFloat>
Number success_exact_small(const std::vector<Number>& pattern_probs, unsigned n_periods,
                           const OmegaPredicate& omega,
                           std::uint64_t work_cap = 1ull << 24) {
    if (pattern_probs.empty()) throw config_error("success_exact_small: empty pattern space");
    if (n_periods == 0) throw config_error("success_exact_small: N must be >= 1");
    if (n_periods > 8 || pattern_probs.size() > (1u << 12))
        throw infeasible_error("success_exact_small: instance beyond the exact-mode limits");
    if (enumeration_work(pattern_probs.size(), n_periods, work_cap) > work_cap)
        throw infeasible_error("success_exact_small: enumeration exceeds the work cap");

    detail::ExactEnumState<Number> st{&pattern_probs, &omega, n_periods,
                                      std::vector<std::uint32_t>(pattern_probs.size(), 0),
                                      Number(0)};
    detail::enumerate_counts<Number>(st, 0, n_periods, Number(1));
    return st.total;
}

inline double success_exact_small_dist(const channel::ErrorPatternDist& dist, unsigned n_periods,
                                       const OmegaPredicate& omega,
                                       std::uint64_t work_cap = 1ull << 24) {
    if (dist.pattern_bits() > 12)
        throw infeasible_error("success_exact_small: pattern space wider than 12 bits");
    auto dense = dist.dense(12);
    std::vector<BigFloat> probs(dense.begin(), dense.end());
    return static_cast<double>(success_exact_small<BigFloat>(probs, n_periods, omega, work_cap));
}

/// Prior-weighted average of per-key success probabilities.
inline double average_success(const std::vector<double>& per_key,
                              const std::vector<double>& priors) {
    if (per_key.size() != priors.size())
        throw config_error("average_success: shape mismatch");
    double s = 0.0, avg = 0.0;
    for (std::size_t i = 0; i < priors.size(); ++i) {
        s += priors[i];
        avg += priors[i] * per_key[i];
    }
    if (std::abs(s - 1.0) > 1e-9)
        throw config_error("average_success: priors do not sum to 1");
    return avg;
}

} // namespace y00lab::breach
